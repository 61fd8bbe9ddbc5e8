#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace ssl3d {

inline constexpr double kRuntimeToleranceS = 15.0;
inline constexpr double kMemoryFloorGb = 4.0;
inline constexpr double kBytesPerGb = 1024.0 * 1024.0 * 1024.0;

struct ResourceSample {
  double t = 0.0;          // seconds since launch
  std::uint64_t mem = 0;   // bytes
};

struct ResourceTrace {
  std::vector<ResourceSample> samples;
  double period = 0.1;

  /// Appends a sample; throws if t does not strictly increase.
  void append(double t, std::uint64_t mem);
  void validate() const;
};

struct EfficiencyReport {
  double runtime_s = 0.0;
  double runtime_over_tolerance_s = 0.0;
  double mem_auc_gb_s = 0.0;
  double peak_mem_gb = 0.0;
};

/// Trapezoidal area of max(0, mem_gb(t) - floor_gb), splitting segments at
/// floor crossings.
double auc_above_floor(const ResourceTrace& trace, double floor_gb = kMemoryFloorGb);

EfficiencyReport efficiency_report(const ResourceTrace& trace, double runtime_s);

nlohmann::json to_json(const EfficiencyReport& report);
nlohmann::json to_json(const ResourceTrace& trace);

// Built-in probe: resident set size summed over the monitored process group.
inline constexpr const char* kRssProbe = "rss";

struct SampledRun {
  int exit_status = 0;
  double runtime_s = 0.0;
  ResourceTrace trace;
};

/// Launches `cmd`, polls `probe` every `period` seconds until it exits, and
/// takes a final sample at exit. `probe` is either kRssProbe or a shell
/// command (with an optional {pid} placeholder) printing a byte count.
SampledRun sample_run(const std::string& cmd, const std::string& probe, double period);

}  // namespace ssl3d
