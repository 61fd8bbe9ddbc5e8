#include "ssl3d/fusion.hpp"

#include <algorithm>
#include <set>
#include <span>

#include "ssl3d/kernels.hpp"

namespace ssl3d {

void FusionPolicy::validate() const {
  if (source_priority.empty()) throw InvalidArgument("fusion policy: source_priority is empty");
  std::set<std::string> seen;
  for (const auto& id : source_priority) {
    if (!seen.insert(id).second) {
      throw InvalidArgument("fusion policy: duplicate source id '" + id + "'");
    }
  }
  if (min_votes && *min_votes == 0) throw InvalidArgument("fusion policy: min_votes must be positive");
}

void PartialLabel::validate() const {
  if (annotated_classes.test(kBackground)) {
    throw InvalidArgument("partial label: background cannot be an annotated class");
  }
  for (auto v : map.data()) {
    if (v >= kNumClasses) throw InvalidArgument("partial label: value exceeds 14");
    if (v != kBackground && !annotated_classes.test(v)) {
      throw InvalidArgument("partial label: class " + std::to_string(v) +
                            " present but not listed as annotated");
    }
  }
}

LabelMap majority_vote(const std::vector<LabelSource>& sources, const FusionPolicy& policy) {
  if (sources.empty()) throw InvalidArgument("majority_vote: no sources");
  policy.validate();
  std::vector<std::pair<std::size_t, const LabelMap*>> ranked;
  for (const auto& s : sources) {
    const auto it = std::find(policy.source_priority.begin(), policy.source_priority.end(), s.id);
    if (it == policy.source_priority.end()) {
      throw InvalidArgument("majority_vote: unknown source id '" + s.id + "'");
    }
    require_same_shape(s.map, sources.front().map, "majority_vote");
    validate_labels(s.map);
    ranked.emplace_back(static_cast<std::size_t>(it - policy.source_priority.begin()), &s.map);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::span<const std::uint8_t>> votes;
  for (const auto& [rank, map] : ranked) votes.push_back(map->data());

  const auto& first = sources.front().map;
  LabelMap out(first.dims(), first.spacing());
  kernels::parallel::majority_vote(votes, policy.min_votes.value_or(0), out.data());
  return out;
}

LabelMap merge_partial(const PartialLabel& gt, const LabelMap& pseudo, const FusionPolicy& policy) {
  require_same_shape(gt.map, pseudo, "merge_partial");
  gt.validate();
  validate_labels(pseudo);
  LabelMap out(gt.map.dims(), gt.map.spacing());
  const auto g = gt.map.data();
  const auto p = pseudo.data();
  auto o = out.data();
  const auto n = static_cast<std::ptrdiff_t>(o.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const std::uint8_t gv = g[i];
    const std::uint8_t pv = p[i];
    if (gv != kBackground && policy.gt_overrides) {
      o[i] = gv;
    } else if (gv != kBackground) {
      o[i] = pv != kBackground ? pv : gv;
    } else if (pv != kBackground && gt.annotated_classes.test(pv) && policy.gt_background_trust) {
      o[i] = kBackground;  // annotator said "not this class" here
    } else {
      o[i] = pv;
    }
  }
  return out;
}

LabelMap merge_organ_tumor(const LabelMap& organ, const LabelMap& tumor, const FusionPolicy& policy) {
  require_same_shape(organ, tumor, "merge_organ_tumor");
  for (auto v : organ.data()) {
    if (v == kTumor) throw InvalidArgument("merge_organ_tumor: organ map contains tumor voxels");
    if (v >= kNumClasses) throw InvalidArgument("merge_organ_tumor: organ map value exceeds 14");
  }
  for (auto v : tumor.data()) {
    if (v != kBackground && v != kTumor) {
      throw InvalidArgument("merge_organ_tumor: tumor map contains class " + std::to_string(v));
    }
  }
  LabelMap out = organ;
  auto o = out.data();
  const auto t = tumor.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (t[i] != kTumor) continue;
    if (policy.tumor_overrides_organ || o[i] == kBackground) o[i] = kTumor;
  }
  return out;
}

LabelMap restrict_classes(const LabelMap& map, const ClassSet& keep) {
  LabelMap out = map;
  for (auto& v : out.data()) {
    if (v >= kNumClasses || !keep.test(v)) v = kBackground;
  }
  return out;
}

}  // namespace ssl3d
