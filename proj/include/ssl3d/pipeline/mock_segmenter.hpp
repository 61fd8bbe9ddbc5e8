#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "ssl3d/pipeline/config.hpp"
#include "ssl3d/tta.hpp"
#include "ssl3d/volume.hpp"

namespace ssl3d {

// Deterministic stand-in for a segmentation network: per-class intensity
// bands (robust center +- k spreads) learned from labeled voxels. The band half-width is
// k * std * (1 + prior / n), where n counts training cases containing the
// class, so more training cases give tighter, more accurate bands.
struct MockParams {
  double k = 3.0;
  double prior = 2.0;
  double temperature = 0.5;  // sigmoid softness, in units of the class std
};

struct MockClassModel {
  std::uint8_t class_id = 0;
  double mean = 0.0;  // robust center (median)
  double std = 0.0;   // robust spread (1.4826 * MAD)
  std::size_t n_cases = 0;
  std::size_t n_voxels = 0;

  double half_width(const MockParams& p) const;
};

struct MockModel {
  MockParams params;
  std::vector<MockClassModel> classes;
};

struct TrainingPair {
  Image image;
  LabelMap label;
};

MockModel train_mock_model(const std::vector<TrainingPair>& cases, const MockParams& params = {});

/// Background keeps a fixed raw score of 0.5; class scores are clipped
/// sigmoids of the signed distance to the band edge; rows are normalized.
ProbMap mock_predict(const MockModel& model, const Image& image);

nlohmann::json to_json(const MockModel& m);
MockModel mock_model_from_json(const nlohmann::json& j);

// Directory-level entry points used by the `mock-segmenter` subcommand.
// Images and labels are matched by file name.
void mock_train_dirs(const std::filesystem::path& train_dir, const std::filesystem::path& label_dir,
                     const std::filesystem::path& model_dir, const MockParams& params = {});
void mock_predict_dirs(const std::filesystem::path& input_dir, const std::filesystem::path& model_dir,
                       const std::filesystem::path& output_dir, OutputMode mode);

/// "<stem>.nii.gz" -> "<stem>"; empty if the name is not a NIfTI file.
std::string nifti_stem(const std::filesystem::path& p);

}  // namespace ssl3d
