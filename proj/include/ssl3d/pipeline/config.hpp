#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssl3d/fusion.hpp"
#include "ssl3d/metrics.hpp"
#include "ssl3d/postprocess.hpp"
#include "ssl3d/preprocess.hpp"

namespace ssl3d {

enum class Phase { tumor, organ, merge, done };

std::string to_string(Phase p);
Phase parse_phase(const std::string& s);

/// Classes a training phase produces pseudo labels for.
ClassSet phase_classes(Phase p);

enum class OutputMode { labels, probabilities };

std::string to_string(OutputMode m);
OutputMode parse_output_mode(const std::string& s);

/// How the external segmenter is driven. Templates may use {train_dir},
/// {label_dir}, {model_dir}, {input_dir}, {output_dir}.
struct SegmenterContract {
  std::string train_cmd;
  std::string predict_cmd;
  OutputMode output_mode = OutputMode::probabilities;

  void validate() const;
};

struct PipelineConfig {
  std::filesystem::path work_dir;
  NormalizationParams normalization;
  bool preprocess_enabled = false;
  std::optional<Spacing> target_spacing;  // unset: median over the manifest
  FusionPolicy fusion;
  bool fusion_priority_explicit = false;
  NsdParams nsd;
  bool tta = true;
  Connectivity connectivity = Connectivity::full;
  ClassSet keep_largest_classes = organ_classes();
  int rounds_tumor = 2;
  int rounds_organ = 2;
  std::vector<Phase> phase_order{Phase::tumor, Phase::organ};
  std::optional<double> stop_change_fraction;
  int workers = 2;
  SegmenterContract segmenter;
  std::optional<std::filesystem::path> heldout_manifest;

  nlohmann::json snapshot;  // effective configuration as parsed

  int rounds_for(Phase p) const { return p == Phase::tumor ? rounds_tumor : rounds_organ; }
};

/// Dotted-key override, e.g. "fusion.gt_overrides=false". The value is parsed
/// as JSON when possible, else taken as a string.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Relative paths resolve against base_dir.
PipelineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir);

PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});

nlohmann::json default_config_json();

}  // namespace ssl3d
