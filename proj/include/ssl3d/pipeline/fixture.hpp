#pragma once

#include <cstdint>
#include <filesystem>

#include "ssl3d/volume.hpp"

namespace ssl3d {

// Synthetic abdominal phantoms for desk-scale pipeline runs: liver with an
// embedded tumor, spleen, right kidney, inside a fat-filled body, plus two
// confounder blobs whose intensity sits just outside the true class bands.
//
// Training cases: 1 full, 2 tumor-only, 1 organ-only, 2 unlabeled.
// Held-out cases: 2 full.
struct FixtureOptions {
  Dims dims{48, 40, 24};
  Spacing spacing{1.2, 1.2, 2.0};
  std::uint32_t seed = 2023;
  double noise_std = 8.0;
  // Written into config.json as the segmenter; empty skips config.json.
  std::filesystem::path segmenter_binary;
};

struct FixturePaths {
  std::filesystem::path manifest;
  std::filesystem::path heldout_manifest;
  std::filesystem::path config;  // empty when not written
};

FixturePaths write_fixture(const std::filesystem::path& dir, const FixtureOptions& options = {});

// Intensities used by the phantom, exposed for tests.
namespace phantom {
inline constexpr double kAir = -1000.0;
inline constexpr double kFat = -100.0;
inline constexpr double kLiver = 60.0;
inline constexpr double kSpleen = 130.0;
inline constexpr double kKidney = 200.0;
inline constexpr double kTumor = -10.0;
inline constexpr double kTumorConfounder = 26.0;
inline constexpr double kKidneyConfounder = 240.0;
}  // namespace phantom

}  // namespace ssl3d
