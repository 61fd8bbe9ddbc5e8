#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssl3d/taxonomy.hpp"
#include "ssl3d/volume.hpp"

namespace ssl3d {

struct FusionPolicy {
  /// Source identifiers, highest priority first. Breaks voting ties.
  std::vector<std::string> source_priority;
  /// Ground-truth foreground always wins over pseudo labels.
  bool gt_overrides = true;
  bool tumor_overrides_organ = true;
  /// When false, pseudo labels may fill ground-truth background even for
  /// annotated classes.
  bool gt_background_trust = false;
  /// Minimum votes for a winner; unset means plurality. Winners below the
  /// threshold become background.
  std::optional<std::size_t> min_votes;

  void validate() const;
};

/// A ground-truth map that only annotates some classes. Voxels of the other
/// classes are indistinguishable from background.
struct PartialLabel {
  LabelMap map;
  ClassSet annotated_classes;

  void validate() const;
};

struct LabelSource {
  std::string id;
  LabelMap map;
};

LabelMap majority_vote(const std::vector<LabelSource>& sources, const FusionPolicy& policy);

LabelMap merge_partial(const PartialLabel& gt, const LabelMap& pseudo, const FusionPolicy& policy);

LabelMap merge_organ_tumor(const LabelMap& organ, const LabelMap& tumor,
                           const FusionPolicy& policy = {});

/// Keeps only voxels whose class is in `keep`; everything else becomes 0.
LabelMap restrict_classes(const LabelMap& map, const ClassSet& keep);

}  // namespace ssl3d
