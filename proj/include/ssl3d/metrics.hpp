#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssl3d/taxonomy.hpp"
#include "ssl3d/volume.hpp"

namespace ssl3d {

struct NsdParams {
  double tau = 1.0;  // mm
  void validate() const;
};

/// 2|P∩G| / (|P|+|G|); 1 when both are empty.
double dsc(const Mask& pred, const Mask& gt);

struct EdtResult {
  DistanceMap distance;       // mm to the nearest foreground voxel center
  bool empty_source = false;  // no foreground: every distance is +inf
};

/// Exact anisotropic Euclidean distance transform (separable lower-envelope
/// method along x, y, z).
EdtResult edt(const Mask& mask, const Spacing& spacing);

/// Foreground voxels with at least one face neighbour that is background or
/// outside the grid.
Mask surface_voxels(const Mask& mask);

double nsd(const Mask& pred, const Mask& gt, const Spacing& spacing, const NsdParams& params);

struct ClassScore {
  double dsc = 1.0;
  double nsd = 1.0;
  bool gt_present = false;
  bool pred_present = false;
};

// Which organ entries enter the per-case organ average.
enum class PresencePolicy {
  present,  // classes present in the prediction or the ground truth
  all,      // all 13 organs, absent ones scoring 1
};

struct MetricReport {
  std::string case_id;
  std::array<ClassScore, kNumClasses> per_class{};  // index = class id; [0] unused
  double organ_average_dsc = 1.0;
  double organ_average_nsd = 1.0;
};

MetricReport evaluate_case(const LabelMap& pred, const LabelMap& gt, const NsdParams& params,
                           const std::string& case_id = {},
                           PresencePolicy policy = PresencePolicy::present);

struct SummaryRow {
  std::string name;
  int class_id = 0;  // 0 marks the organ-average row
  double dsc_mean = 0.0;
  double dsc_std = 0.0;
  double nsd_mean = 0.0;
  double nsd_std = 0.0;
};

struct CohortSummary {
  std::vector<SummaryRow> rows;  // classes 1..14, then Organ-Average
  std::vector<MetricReport> cases;
};

/// Mean and population standard deviation per class and for the organ average.
CohortSummary aggregate_cohort(std::span<const MetricReport> reports);

std::string to_csv(const CohortSummary& summary);
nlohmann::json to_json(const MetricReport& report);
nlohmann::json to_json(const CohortSummary& summary);

}  // namespace ssl3d
