#pragma once

// Brute-force reference computations used as test oracles. Nothing here calls
// into the library's algorithms; only the container types are shared.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "ssl3d/volume.hpp"

namespace oracle {

using ssl3d::Dims;
using ssl3d::Spacing;

struct Voxel {
  long x, y, z;
};

inline std::vector<Voxel> foreground(const std::vector<std::uint8_t>& m, const Dims& d) {
  std::vector<Voxel> out;
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x)
        if (m[d.index(x, y, z)]) out.push_back({long(x), long(y), long(z)});
  return out;
}

inline double distance_mm(const Voxel& a, const Voxel& b, const Spacing& s) {
  const double dx = double(a.x - b.x) * s.dx;
  const double dy = double(a.y - b.y) * s.dy;
  const double dz = double(a.z - b.z) * s.dz;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// All-pairs distance from every voxel to the nearest foreground voxel.
inline std::vector<double> edt(const std::vector<std::uint8_t>& m, const Dims& d, const Spacing& s) {
  const auto fg = foreground(m, d);
  std::vector<double> out(d.count(), std::numeric_limits<double>::infinity());
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x) {
        const Voxel v{long(x), long(y), long(z)};
        double best = std::numeric_limits<double>::infinity();
        for (const auto& f : fg) best = std::min(best, distance_mm(v, f, s));
        out[d.index(x, y, z)] = best;
      }
  return out;
}

inline std::size_t tally(const std::vector<std::uint8_t>& m) {
  return std::size_t(std::count_if(m.begin(), m.end(), [](auto v) { return v != 0; }));
}

inline double dsc(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i] != 0;
    nb += b[i] != 0;
    both += a[i] && b[i];
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * double(both) / double(na + nb);
}

// Foreground voxels with a face neighbor that is background or off-grid.
inline std::vector<Voxel> surface(const std::vector<std::uint8_t>& m, const Dims& d) {
  std::vector<Voxel> out;
  const auto fg = [&](long x, long y, long z) {
    if (x < 0 || y < 0 || z < 0 || x >= long(d.nx) || y >= long(d.ny) || z >= long(d.nz)) return false;
    return m[d.index(std::size_t(x), std::size_t(y), std::size_t(z))] != 0;
  };
  for (const auto& v : foreground(m, d)) {
    const bool interior = fg(v.x - 1, v.y, v.z) && fg(v.x + 1, v.y, v.z) && fg(v.x, v.y - 1, v.z) &&
                          fg(v.x, v.y + 1, v.z) && fg(v.x, v.y, v.z - 1) && fg(v.x, v.y, v.z + 1);
    if (!interior) out.push_back(v);
  }
  return out;
}

// Counts surface voxels of each mask within tau of the other surface.
inline double nsd(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b, const Dims& d,
                  const Spacing& s, double tau) {
  const auto sa = surface(a, d);
  const auto sb = surface(b, d);
  if (sa.empty() && sb.empty()) return 1.0;
  if (sa.empty() || sb.empty()) return 0.0;
  const auto close_count = [&](const std::vector<Voxel>& from, const std::vector<Voxel>& to) {
    std::size_t n = 0;
    for (const auto& p : from) {
      for (const auto& q : to) {
        if (distance_mm(p, q, s) <= tau) {
          ++n;
          break;
        }
      }
    }
    return n;
  };
  return double(close_count(sa, sb) + close_count(sb, sa)) / double(sa.size() + sb.size());
}

// Breadth-first flood fill; ids in x-fastest scan order of first encounter.
inline std::pair<std::vector<std::uint32_t>, std::vector<std::size_t>> components(
    const std::vector<std::uint8_t>& m, const Dims& d, int connectivity) {
  std::vector<std::uint32_t> ids(m.size(), 0);
  std::vector<std::size_t> sizes;
  std::vector<std::array<int, 3>> offsets;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int manhattan = std::abs(dx) + std::abs(dy) + std::abs(dz);
        if (manhattan == 0) continue;
        if (connectivity == 6 && manhattan != 1) continue;
        offsets.push_back({dx, dy, dz});
      }
  for (std::size_t z = 0; z < d.nz; ++z)
    for (std::size_t y = 0; y < d.ny; ++y)
      for (std::size_t x = 0; x < d.nx; ++x) {
        const auto start = d.index(x, y, z);
        if (!m[start] || ids[start]) continue;
        const auto id = std::uint32_t(sizes.size() + 1);
        std::size_t size = 0;
        std::deque<Voxel> queue{{long(x), long(y), long(z)}};
        ids[start] = id;
        while (!queue.empty()) {
          const auto v = queue.front();
          queue.pop_front();
          ++size;
          for (const auto& o : offsets) {
            const long nx = v.x + o[0], ny = v.y + o[1], nz = v.z + o[2];
            if (nx < 0 || ny < 0 || nz < 0 || nx >= long(d.nx) || ny >= long(d.ny) || nz >= long(d.nz)) continue;
            const auto j = d.index(std::size_t(nx), std::size_t(ny), std::size_t(nz));
            if (m[j] && !ids[j]) {
              ids[j] = id;
              queue.push_back({nx, ny, nz});
            }
          }
        }
        sizes.push_back(size);
      }
  return {ids, sizes};
}

// Per-voxel vote count. `maps` are in priority order (highest first).
// Returns the winning class, or 0 when min_votes is set and not met.
inline std::vector<std::uint8_t> vote(const std::vector<std::vector<std::uint8_t>>& maps, std::size_t min_votes) {
  const std::size_t n = maps.front().size();
  std::vector<std::uint8_t> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::map<int, std::size_t> counts;
    for (const auto& m : maps) ++counts[m[i]];
    std::size_t best = 0;
    for (const auto& [cls, c] : counts) best = std::max(best, c);
    // Tie: the first source (in priority order) whose class has the top count.
    int winner = -1;
    for (const auto& m : maps) {
      if (counts[m[i]] == best) {
        winner = m[i];
        break;
      }
    }
    out[i] = (min_votes > 0 && best < min_votes) ? 0 : std::uint8_t(winner);
  }
  return out;
}

// Direct evaluation of the voxel-center linear interpolation formula along
// one axis of length n_in, sampled at output index i with the given scale.
inline double linear_1d(const std::vector<double>& f, std::size_t i, double scale) {
  double c = (double(i) + 0.5) * scale - 0.5;
  c = std::clamp(c, 0.0, double(f.size() - 1));
  const auto lo = std::size_t(std::floor(c));
  const auto hi = std::min(lo + 1, f.size() - 1);
  const double t = c - double(lo);
  return f[lo] * (1.0 - t) + f[hi] * t;
}

// --- random instance generators -----------------------------------------------

inline std::vector<std::uint8_t> random_mask(std::mt19937& rng, std::size_t n, double density) {
  std::bernoulli_distribution b(density);
  std::vector<std::uint8_t> m(n);
  for (auto& v : m) v = b(rng) ? 1 : 0;
  return m;
}

inline Spacing random_spacing(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(0.3, 3.5);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace oracle
