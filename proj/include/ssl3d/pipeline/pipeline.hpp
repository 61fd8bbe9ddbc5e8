#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "ssl3d/pipeline/config.hpp"
#include "ssl3d/pipeline/manifest.hpp"
#include "ssl3d/pipeline/state.hpp"

namespace ssl3d {

class SegmenterError : public Error {
 public:
  using Error::Error;
};

/// Everything a round needs besides the state itself.
struct PipelineInputs {
  const Manifest& manifest;
  const SegmenterContract& contract;
  const PipelineConfig& config;
  const Manifest* heldout = nullptr;  // full-label evaluation cases, optional
};

/// Loads the persisted state (reverting cases whose files no longer match
/// their digests) or creates a fresh one.
PipelineState open_state(StateStore& store, const PipelineInputs& in);

/// One teacher -> pseudo-label -> fuse round of `phase`. State is persisted
/// after every stage and every case; a killed run resumes where it stopped.
PipelineState run_phase(PipelineState state, const PipelineInputs& in, Phase phase, StateStore& store);

/// Moves past a phase whose rounds are complete (or that stopped early).
/// Returns true if the phase changed.
bool advance_phase(PipelineState& state, const PipelineConfig& config, StateStore& store);

/// Combines organ and tumor labels (and external sources) into the final
/// 14-class label per case.
PipelineState run_merge(PipelineState state, const PipelineInputs& in, StateStore& store);

/// Full run: tumor rounds, organ rounds (in the configured order), merge.
/// Returns the final report, also written to <work_dir>/report.json.
nlohmann::json run_pipeline(const PipelineInputs& in, StateStore& store);

nlohmann::json build_report(const PipelineState& state, const PipelineInputs& in);

}  // namespace ssl3d
