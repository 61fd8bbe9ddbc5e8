#include "ssl3d/postprocess.hpp"

#include <algorithm>
#include <numeric>

namespace ssl3d {

Connectivity connectivity_from_int(int n) {
  if (n == 6) return Connectivity::face;
  if (n == 26) return Connectivity::full;
  throw InvalidArgument("connectivity must be 6 or 26, got " + std::to_string(n));
}

namespace {

class DisjointSet {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    // Keep the older root so roots stay at their earliest provisional label.
    if (a < b) parent_[b] = a;
    else parent_[a] = b;
  }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
};

struct Offset {
  int dx, dy, dz;
};

// Neighbours already visited by an x-fastest forward scan.
std::vector<Offset> backward_neighbours(Connectivity c) {
  std::vector<Offset> out;
  for (int dz = -1; dz <= 0; ++dz) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dz == 0 && (dy > 0 || (dy == 0 && dx >= 0))) continue;
        const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (c == Connectivity::face && manhattan != 1) continue;
        out.push_back({dx, dy, dz});
      }
    }
  }
  return out;
}

}  // namespace

ComponentMap connected_components(const Mask& mask, Connectivity connectivity) {
  validate_binary(mask, "connected_components");
  const Dims d = mask.dims();
  const auto in = mask.data();
  std::vector<std::uint32_t> provisional(in.size(), 0);
  DisjointSet sets;
  sets.make();  // slot 0 stands for background
  const auto neighbours = backward_neighbours(connectivity);

  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        const std::size_t i = d.index(x, y, z);
        if (!in[i]) continue;
        std::uint32_t label = 0;
        for (const auto& o : neighbours) {
          const auto nx = static_cast<std::ptrdiff_t>(x) + o.dx;
          const auto ny = static_cast<std::ptrdiff_t>(y) + o.dy;
          const auto nz = static_cast<std::ptrdiff_t>(z) + o.dz;
          if (nx < 0 || ny < 0 || nz < 0 || nx >= static_cast<std::ptrdiff_t>(d.nx) ||
              ny >= static_cast<std::ptrdiff_t>(d.ny)) {
            continue;
          }
          const std::uint32_t nl = provisional[d.index(static_cast<std::size_t>(nx),
                                                       static_cast<std::size_t>(ny),
                                                       static_cast<std::size_t>(nz))];
          if (nl == 0) continue;
          if (label == 0) label = nl;
          else sets.unite(label, nl);
        }
        provisional[i] = label != 0 ? label : sets.make();
      }
    }
  }

  // Second pass: number roots in scan order of first appearance.
  std::vector<std::uint32_t> final_id(sets.size(), 0);
  ComponentMap out{ComponentLabels(d, mask.spacing()), {}};
  auto labels = out.labels.data();
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!provisional[i]) continue;
    const auto root = sets.find(provisional[i]);
    if (final_id[root] == 0) {
      out.sizes.push_back(0);
      final_id[root] = static_cast<std::uint32_t>(out.sizes.size());
    }
    labels[i] = final_id[root];
    ++out.sizes[final_id[root] - 1];
  }
  return out;
}

LabelMap keep_largest(const LabelMap& map, const ClassSet& classes, Connectivity connectivity) {
  LabelMap out = map;
  for (int c : members(classes)) {
    if (c == kBackground) continue;
    const auto cls = static_cast<std::uint8_t>(c);
    const Mask mask = binarize(map, cls);
    const auto cc = connected_components(mask, connectivity);
    if (cc.count() <= 1) continue;
    const auto largest = static_cast<std::uint32_t>(
        std::max_element(cc.sizes.begin(), cc.sizes.end()) - cc.sizes.begin() + 1);
    const auto labels = cc.labels.data();
    auto o = out.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
      if (labels[i] != 0 && labels[i] != largest) o[i] = kBackground;
    }
  }
  return out;
}

}  // namespace ssl3d
