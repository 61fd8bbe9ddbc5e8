#pragma once

// Voxel kernels behind the public operations. Every kernel exists twice:
// `reference` is the plain serial implementation kept for testing and
// benchmarking, `parallel` is the OpenMP version the library uses. Both must
// agree (bit-exactly unless noted).

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ssl3d/volume.hpp"

namespace ssl3d::kernels {

struct NormalizeArgs {
  double clip_lo;
  double clip_hi;
  double mean;
  double stddev;
};

// Output voxel i along an axis samples input coordinate
// (i + 0.5) * scale - 0.5, clamped to [0, n_in - 1].
struct ResampleGeometry {
  Dims in;
  Dims out;
  std::array<double, 3> scale;
};

namespace reference {

void clip_normalize(std::span<const float> in, std::span<float> out, const NormalizeArgs& args);

// Direct per-voxel trilinear evaluation (8 taps). Agrees with the separable
// parallel kernel to float rounding, not bit-exactly.
std::vector<float> resample_linear(std::span<const float> in, const ResampleGeometry& g);

std::vector<std::uint8_t> resample_nearest(std::span<const std::uint8_t> in, const ResampleGeometry& g);

// Squared Euclidean distance (mm^2) to the nearest nonzero voxel; +inf when
// the mask is empty.
std::vector<double> edt_squared(std::span<const std::uint8_t> mask, Dims dims, Spacing spacing);

// `votes` is ordered by priority, highest first. min_votes == 0 disables the
// vote threshold; otherwise winners below it become background.
void majority_vote(std::span<const std::span<const std::uint8_t>> votes, std::size_t min_votes,
                   std::span<std::uint8_t> out);

}  // namespace reference

namespace parallel {

void clip_normalize(std::span<const float> in, std::span<float> out, const NormalizeArgs& args);
std::vector<float> resample_linear(std::span<const float> in, const ResampleGeometry& g);
std::vector<std::uint8_t> resample_nearest(std::span<const std::uint8_t> in, const ResampleGeometry& g);
std::vector<double> edt_squared(std::span<const std::uint8_t> mask, Dims dims, Spacing spacing);
void majority_vote(std::span<const std::span<const std::uint8_t>> votes, std::size_t min_votes,
                   std::span<std::uint8_t> out);

}  // namespace parallel

}  // namespace ssl3d::kernels
