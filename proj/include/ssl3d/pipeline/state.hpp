#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssl3d/pipeline/config.hpp"
#include "ssl3d/taxonomy.hpp"

namespace ssl3d {

/// SHA-256 of the file contents, lowercase hex.
std::string file_digest(const std::filesystem::path& path);

struct LabelFile {
  std::filesystem::path path;
  std::string digest;

  bool intact() const;  // file exists and matches digest
};

enum class CaseStatus { pending, pseudo_labeled, fused, failed };

std::string to_string(CaseStatus s);

struct CaseProgress {
  CaseStatus status = CaseStatus::pending;
  std::optional<LabelFile> pseudo;
  std::optional<LabelFile> fused;
};

// Where the current round stands. Per-case progress applies once predicted.
enum class RoundStage { idle, trained, predicted };

std::string to_string(RoundStage s);

struct RoundSummary {
  Phase phase = Phase::tumor;
  int round = 0;
  std::size_t cases_labeled = 0;
  std::size_t cases_failed = 0;
  std::array<std::size_t, kNumClasses> class_voxels{};
  double changed_fraction = 1.0;
  std::optional<double> heldout_mean_dsc;
  std::optional<double> heldout_mean_nsd;
};

struct PipelineState {
  Phase phase = Phase::tumor;
  int round = 0;  // completed rounds of the current phase
  bool phase_stopped = false;
  RoundStage stage = RoundStage::idle;
  std::map<std::string, CaseProgress> cases;  // current round
  std::map<std::string, std::map<std::string, LabelFile>> phase_labels;  // phase -> case -> latest fused
  std::map<std::string, LabelFile> final_labels;
  std::vector<RoundSummary> history;
  std::optional<Spacing> target_spacing;
  nlohmann::json config_snapshot;
};

nlohmann::json to_json(const PipelineState& s);
PipelineState state_from_json(const nlohmann::json& j);

/// Persists state atomically (write to a temp file, then rename).
class StateStore {
 public:
  explicit StateStore(std::filesystem::path path) : path_(std::move(path)) {}

  const std::filesystem::path& path() const { return path_; }
  bool exists() const;
  PipelineState load() const;
  void save(const PipelineState& state);

  // Test hook: when > 0, the process exits abruptly after that many saves.
  void crash_after(int saves) { crash_after_ = saves; }

 private:
  std::filesystem::path path_;
  int saves_ = 0;
  int crash_after_ = 0;
};

}  // namespace ssl3d
