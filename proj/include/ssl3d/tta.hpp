#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ssl3d/taxonomy.hpp"
#include "ssl3d/volume.hpp"

namespace ssl3d {

struct FlipSpec {
  bool flip_x = false;
  bool flip_y = false;
  bool flip_z = false;

  bool identity() const { return !flip_x && !flip_y && !flip_z; }
  bool operator==(const FlipSpec&) const = default;
};

std::string to_string(const FlipSpec& f);

/// All 8 flips, as a 3-bit counter over (x, y, z) with z the low bit.
std::vector<FlipSpec> enumerate_flips();

template <typename T, typename Tag>
Grid<T, Tag> apply_flip(const Grid<T, Tag>& vol, const FlipSpec& spec) {
  if (spec.identity()) return vol;
  const Dims d = vol.dims();
  Grid<T, Tag> out(d, vol.spacing());
  const auto in = vol.data();
  auto o = out.data();
  const auto nz = static_cast<std::ptrdiff_t>(d.nz);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t zi = 0; zi < nz; ++zi) {
    const auto z = static_cast<std::size_t>(zi);
    const std::size_t sz = spec.flip_z ? d.nz - 1 - z : z;
    for (std::size_t y = 0; y < d.ny; ++y) {
      const std::size_t sy = spec.flip_y ? d.ny - 1 - y : y;
      for (std::size_t x = 0; x < d.nx; ++x) {
        const std::size_t sx = spec.flip_x ? d.nx - 1 - x : x;
        o[d.index(x, y, z)] = in[d.index(sx, sy, sz)];
      }
    }
  }
  return out;
}

/// Per-class probability channels over a shared grid. Classes not listed have
/// probability 0 everywhere.
class ProbMap {
 public:
  ProbMap() = default;
  ProbMap(std::vector<std::uint8_t> classes, std::vector<Image> channels);

  const std::vector<std::uint8_t>& classes() const { return classes_; }
  const std::vector<Image>& channels() const { return channels_; }
  const Image& channel(std::size_t k) const { return channels_[k]; }
  std::size_t num_classes() const { return classes_.size(); }
  const Dims& dims() const { return channels_.front().dims(); }
  const Spacing& spacing() const { return channels_.front().spacing(); }

  /// Checks per-voxel sums (within tol) and the [0, 1] range.
  void validate(double tol = 1e-4) const;

 private:
  std::vector<std::uint8_t> classes_;
  std::vector<Image> channels_;
};

ProbMap apply_flip(const ProbMap& prob, const FlipSpec& spec);

/// Inverse-flips each entry, averages per class, renormalizes each voxel.
ProbMap aggregate(const std::vector<std::pair<FlipSpec, ProbMap>>& probs);

/// Per voxel, the lowest class index with the maximum probability.
LabelMap argmax_labels(const ProbMap& prob);

}  // namespace ssl3d
