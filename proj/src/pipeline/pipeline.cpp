#include "ssl3d/pipeline/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>

#include <spdlog/spdlog.h>

#include "ssl3d/nifti.hpp"
#include "ssl3d/pipeline/mock_segmenter.hpp"
#include "ssl3d/subprocess.hpp"
#include "ssl3d/tta.hpp"
#include "worker_pool.hpp"

namespace ssl3d {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSelfSource = "self";

fs::path phase_root(const PipelineConfig& c, Phase p) { return c.work_dir / to_string(p); }

fs::path round_root(const PipelineConfig& c, Phase p, int round) {
  return phase_root(c, p) / ("round_" + std::to_string(round));
}

void reset_dir(const fs::path& d) {
  fs::remove_all(d);
  fs::create_directories(d);
}

void save_atomic(const Volume& vol, const fs::path& path) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  save_nifti(vol, tmp, true);
  fs::rename(tmp, path);
}

LabelFile write_label(const LabelMap& map, const fs::path& path) {
  save_atomic(make_volume(map), path);
  return {path, file_digest(path)};
}

std::string nifti_suffix(const fs::path& p) {
  return has_gzip_extension(p) ? ".nii.gz" : ".nii";
}

void link_file(const fs::path& target, const fs::path& link) {
  fs::remove(link);
  fs::create_symlink(fs::absolute(target), link);
}

// Ground truth restricted to its annotated classes. Unlabeled cases get an
// all-background map on the image grid.
PartialLabel load_ground_truth(const CaseRecord& rec) {
  const auto header = read_nifti_header(rec.image_path);
  if (!rec.label_path) return {LabelMap(header.dims, header.spacing), rec.annotated_classes};
  LabelMap map = load_label_map(*rec.label_path);
  if (map.dims() != header.dims) {
    throw ShapeMismatch("label of case " + rec.case_id + " has dims " + to_string(map.dims()) +
                        ", image has " + to_string(header.dims));
  }
  return {restrict_classes(map, rec.annotated_classes), rec.annotated_classes};
}

PartialLabel restrict_partial(const PartialLabel& gt, const ClassSet& keep) {
  const ClassSet classes = gt.annotated_classes & keep;
  return {restrict_classes(gt.map, classes), classes};
}

// Maps between a case's native grid and the grid the segmenter sees.
class ModelSpace {
 public:
  ModelSpace(const PipelineConfig& config, std::optional<Spacing> target)
      : config_(config), target_(target) {}

  bool active() const { return config_.preprocess_enabled; }

  // Path of the image the segmenter should read for `rec`. Preprocessed
  // copies are cached under the work directory.
  fs::path image_path(const CaseRecord& rec) const {
    if (!active()) return rec.image_path;
    const fs::path cached = config_.work_dir / "preprocessed" / (rec.case_id + ".nii.gz");
    if (!fs::exists(cached)) {
      save_atomic(make_volume(to_model(load_image(rec.image_path))), cached);
    }
    return cached;
  }

  Image model_image(const CaseRecord& rec) const { return load_image(image_path(rec)); }

  LabelMap labels_to_model(const LabelMap& map) const {
    if (!active()) return map;
    return resample_labels(map, ResampleSpec{.target = *target_});
  }

  LabelMap labels_to_native(const LabelMap& map, const NiftiHeaderInfo& native) const {
    if (!active()) return map;
    return resample_labels_to(map, native.dims, native.spacing);
  }

 private:
  Image to_model(const Image& native) const {
    return resample_image(clip_normalize(native, config_.normalization), ResampleSpec{.target = *target_});
  }

  const PipelineConfig& config_;
  std::optional<Spacing> target_;
};

bool use_tta(const PipelineConfig& c) {
  return c.tta && c.segmenter.output_mode == OutputMode::probabilities;
}

std::string flip_stem(const std::string& id, std::size_t k) { return id + "__flip" + std::to_string(k); }

// Output files of one predict call, grouped by input stem.
struct PredictionIndex {
  std::map<std::string, std::map<int, fs::path>> probs;
  std::map<std::string, fs::path> labels;

  explicit PredictionIndex(const fs::path& dir) {
    if (!fs::is_directory(dir)) return;
    for (const auto& e : fs::directory_iterator(dir)) {
      const std::string stem = nifti_stem(e.path());
      if (stem.empty()) continue;
      const auto pos = stem.rfind("_prob_");
      if (pos != std::string::npos) {
        const std::string digits = stem.substr(pos + 6);
        if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit) && digits.size() <= 3) {
          probs[stem.substr(0, pos)][std::stoi(digits)] = e.path();
          continue;
        }
      }
      labels[stem] = e.path();
    }
  }
};

std::optional<ProbMap> load_probs(const PredictionIndex& index, const std::string& stem) {
  const auto it = index.probs.find(stem);
  if (it == index.probs.end()) return std::nullopt;
  std::vector<std::uint8_t> classes;
  std::vector<Image> channels;
  for (const auto& [cls, path] : it->second) {
    if (cls >= static_cast<int>(kNumClasses)) {
      throw InvalidArgument("probability file for unknown class: " + path.string());
    }
    classes.push_back(static_cast<std::uint8_t>(cls));
    channels.push_back(load_image(path));
  }
  return ProbMap(std::move(classes), std::move(channels));
}

// The segmenter's label for one case on the model grid, or nullopt when its
// output is missing.
std::optional<LabelMap> read_prediction(const PredictionIndex& index, const std::string& id,
                                        const PipelineConfig& config, const Dims& expected) {
  std::optional<LabelMap> out;
  if (config.segmenter.output_mode == OutputMode::labels) {
    const auto it = index.labels.find(id);
    if (it == index.labels.end()) return std::nullopt;
    out = load_label_map(it->second);
  } else if (use_tta(config)) {
    std::vector<std::pair<FlipSpec, ProbMap>> entries;
    const auto flips = enumerate_flips();
    for (std::size_t k = 0; k < flips.size(); ++k) {
      auto p = load_probs(index, flip_stem(id, k));
      if (!p) return std::nullopt;
      entries.emplace_back(flips[k], std::move(*p));
    }
    out = argmax_labels(aggregate(entries));
  } else {
    auto p = load_probs(index, id);
    if (!p) return std::nullopt;
    out = argmax_labels(*p);
  }
  if (out->dims() != expected) {
    throw ShapeMismatch("prediction for " + id + " has dims " + to_string(out->dims()) + ", expected " +
                        to_string(expected));
  }
  return out;
}

// Writes the inputs for one predict call: flipped copies under TTA, else links.
void stage_predict_inputs(const std::vector<const CaseRecord*>& cases, const ModelSpace& space,
                          const PipelineConfig& config, const fs::path& dir) {
  reset_dir(dir);
  detail::parallel_for_each(cases.size(), config.workers, [&](std::size_t i) {
    const CaseRecord& rec = *cases[i];
    const fs::path src = space.image_path(rec);
    if (!use_tta(config)) {
      link_file(src, dir / (rec.case_id + nifti_suffix(src)));
      return;
    }
    const Image image = load_image(src);
    const auto flips = enumerate_flips();
    for (std::size_t k = 0; k < flips.size(); ++k) {
      save_nifti(make_volume(apply_flip(image, flips[k])), dir / (flip_stem(rec.case_id, k) + ".nii.gz"), true);
    }
  });
}

void run_segmenter(const std::string& tmpl, const std::map<std::string, std::string>& vars,
                   const fs::path& log, const std::string& what) {
  const std::string cmd = expand_template(tmpl, vars);
  spdlog::info("{}: {}", what, cmd);
  const int code = run_shell(cmd, SpawnOptions{.log_file = log});
  if (code != 0) {
    throw SegmenterError(what + " command exited with code " + std::to_string(code) + " (log: " +
                         log.string() + ")");
  }
}

std::vector<int> class_list(const ClassSet& s) { return members(s); }

class RoundRunner {
 public:
  RoundRunner(PipelineState& state, const PipelineInputs& in, Phase phase, StateStore& store)
      : state_(state),
        in_(in),
        phase_(phase),
        classes_(phase_classes(phase)),
        store_(store),
        space_(in.config, state.target_spacing),
        dir_(round_root(in.config, phase, state.round)) {}

  void run() {
    if (state_.stage == RoundStage::idle) {
      select_targets();
      train();
    }
    if (state_.stage == RoundStage::trained) predict();
    label_cases();
    finish_round();
  }

 private:
  std::map<std::string, LabelFile>& phase_labels() { return state_.phase_labels[to_string(phase_)]; }

  bool is_teacher(const CaseRecord& rec) const { return (rec.annotated_classes & classes_).any(); }
  bool is_target(const CaseRecord& rec) const { return (classes_ & ~rec.annotated_classes).any(); }

  void select_targets() {
    state_.cases.clear();
    for (const auto& rec : in_.manifest.cases) {
      if (is_target(rec)) state_.cases[rec.case_id] = CaseProgress{};
    }
    const bool any_teacher = std::any_of(in_.manifest.cases.begin(), in_.manifest.cases.end(),
                                         [&](const CaseRecord& r) { return is_teacher(r); });
    if (!any_teacher) {
      throw InvalidArgument("no case annotates any " + to_string(phase_) + " class; nothing to train on");
    }
    store_.save(state_);
  }

  // Training set: every case with a label from an earlier round, plus every
  // case whose ground truth covers at least one class of this phase.
  void train() {
    const fs::path images = dir_ / "train_images";
    const fs::path labels = dir_ / "train_labels";
    reset_dir(images);
    reset_dir(labels);
    std::vector<const CaseRecord*> cases;
    for (const auto& rec : in_.manifest.cases) {
      if (phase_labels().count(rec.case_id) || is_teacher(rec)) cases.push_back(&rec);
    }
    spdlog::info("{} round {}: training on {} cases", to_string(phase_), state_.round, cases.size());
    detail::parallel_for_each(cases.size(), in_.config.workers, [&](std::size_t i) {
      const CaseRecord& rec = *cases[i];
      const auto prev = phase_labels().find(rec.case_id);
      const LabelMap label = prev != phase_labels().end()
                                 ? load_label_map(prev->second.path)
                                 : restrict_partial(load_ground_truth(rec), classes_).map;
      const fs::path img = space_.image_path(rec);
      link_file(img, images / (rec.case_id + nifti_suffix(img)));
      save_label_map(space_.labels_to_model(label), labels / (rec.case_id + ".nii.gz"));
    });
    fs::create_directories(dir_ / "logs");
    reset_dir(model_dir());
    run_segmenter(in_.config.segmenter.train_cmd, vars(images, labels, {}, {}), dir_ / "logs" / "train.log",
                  "train");
    state_.stage = RoundStage::trained;
    store_.save(state_);
  }

  fs::path model_dir() const { return dir_ / "model"; }

  std::map<std::string, std::string> vars(const fs::path& train, const fs::path& labels, const fs::path& input,
                                          const fs::path& output) const {
    return {{"train_dir", train.string()},   {"label_dir", labels.string()},
            {"model_dir", model_dir().string()}, {"input_dir", input.string()},
            {"output_dir", output.string()}};
  }

  void predict() {
    std::vector<const CaseRecord*> targets;
    for (const auto& [id, _] : state_.cases) targets.push_back(in_.manifest.find(id));
    const fs::path images = dir_ / "train_images";
    const fs::path labels = dir_ / "train_labels";
    if (!targets.empty()) {
      stage_predict_inputs(targets, space_, in_.config, dir_ / "predict_in");
      reset_dir(dir_ / "predict_out");
      run_segmenter(in_.config.segmenter.predict_cmd,
                    vars(images, labels, dir_ / "predict_in", dir_ / "predict_out"),
                    dir_ / "logs" / "predict.log", "predict");
    }
    if (in_.heldout && !in_.heldout->cases.empty()) {
      std::vector<const CaseRecord*> cases;
      for (const auto& rec : in_.heldout->cases) cases.push_back(&rec);
      stage_predict_inputs(cases, space_, in_.config, dir_ / "eval_in");
      reset_dir(dir_ / "eval_out");
      run_segmenter(in_.config.segmenter.predict_cmd, vars(images, labels, dir_ / "eval_in", dir_ / "eval_out"),
                    dir_ / "logs" / "eval.log", "evaluate");
    }
    for (auto& [_, progress] : state_.cases) progress = CaseProgress{};
    state_.stage = RoundStage::predicted;
    store_.save(state_);
  }

  LabelMap postprocess_prediction(const LabelMap& pred) const {
    return keep_largest(restrict_classes(pred, classes_), in_.config.keep_largest_classes & classes_,
                        in_.config.connectivity);
  }

  void label_cases() {
    const PredictionIndex index(dir_ / "predict_out");
    std::vector<std::string> todo;
    for (const auto& [id, p] : state_.cases) {
      if (p.status == CaseStatus::pending || p.status == CaseStatus::pseudo_labeled) todo.push_back(id);
    }
    std::mutex mutex;
    detail::parallel_for_each(todo.size(), in_.config.workers, [&](std::size_t i) {
      const std::string& id = todo[i];
      const CaseRecord& rec = *in_.manifest.find(id);
      CaseProgress progress;
      {
        std::lock_guard lock(mutex);
        progress = state_.cases.at(id);
      }
      const auto native = read_nifti_header(rec.image_path);
      LabelMap pseudo;
      if (progress.status == CaseStatus::pseudo_labeled) {
        pseudo = load_label_map(progress.pseudo->path);
      } else {
        const Dims expected = space_.active() ? read_nifti_header(space_.image_path(rec)).dims : native.dims;
        const auto pred = read_prediction(index, id, in_.config, expected);
        if (!pred) {
          spdlog::warn("{}: no segmenter output, case marked failed", id);
          std::lock_guard lock(mutex);
          state_.cases[id] = CaseProgress{.status = CaseStatus::failed, .pseudo = std::nullopt, .fused = std::nullopt};
          store_.save(state_);
          return;
        }
        pseudo = postprocess_prediction(space_.labels_to_native(*pred, native));
        progress.pseudo = write_label(pseudo, dir_ / "pseudo" / (id + ".nii.gz"));
        progress.status = CaseStatus::pseudo_labeled;
        std::lock_guard lock(mutex);
        state_.cases[id] = progress;
        store_.save(state_);
      }
      const LabelMap fused =
          merge_partial(restrict_partial(load_ground_truth(rec), classes_), pseudo, in_.config.fusion);
      progress.fused = write_label(fused, dir_ / "fused" / (id + ".nii.gz"));
      progress.status = CaseStatus::fused;
      std::lock_guard lock(mutex);
      state_.cases[id] = progress;
      store_.save(state_);
    });
  }

  // Mean held-out scores over this phase's classes present in the ground truth.
  void evaluate_heldout(RoundSummary& summary) {
    if (!in_.heldout || in_.heldout->cases.empty()) return;
    const PredictionIndex index(dir_ / "eval_out");
    const auto& cases = in_.heldout->cases;
    std::vector<MetricReport> reports(cases.size());
    detail::parallel_for_each(cases.size(), in_.config.workers, [&](std::size_t i) {
      const CaseRecord& rec = cases[i];
      const auto native = read_nifti_header(rec.image_path);
      const Dims expected = space_.active() ? read_nifti_header(space_.image_path(rec)).dims : native.dims;
      const auto pred = read_prediction(index, rec.case_id, in_.config, expected);
      if (!pred) throw SegmenterError("no segmenter output for held-out case " + rec.case_id);
      const LabelMap pp = postprocess_prediction(space_.labels_to_native(*pred, native));
      const LabelMap gt = restrict_partial(load_ground_truth(rec), classes_).map;
      reports[i] = evaluate_case(pp, gt, in_.config.nsd, rec.case_id);
    });
    double dsc_sum = 0.0;
    double nsd_sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : reports) {
      for (const auto c : class_list(classes_)) {
        if (!r.per_class[c].gt_present) continue;
        dsc_sum += r.per_class[c].dsc;
        nsd_sum += r.per_class[c].nsd;
        ++n;
      }
    }
    if (n > 0) {
      summary.heldout_mean_dsc = dsc_sum / static_cast<double>(n);
      summary.heldout_mean_nsd = nsd_sum / static_cast<double>(n);
    }
    const auto cohort = aggregate_cohort(reports);
    std::ofstream(dir_ / "heldout_metrics.csv") << to_csv(cohort);
    std::ofstream(dir_ / "heldout_metrics.json") << to_json(cohort).dump(2) << '\n';
  }

  void finish_round() {
    RoundSummary summary;
    summary.phase = phase_;
    summary.round = state_.round;
    std::size_t changed = 0;
    std::size_t total = 0;
    for (const auto& [id, p] : state_.cases) {
      if (p.status != CaseStatus::fused) {
        ++summary.cases_failed;
        continue;
      }
      ++summary.cases_labeled;
      const LabelMap fused = load_label_map(p.fused->path);
      for (const auto v : fused.values()) ++summary.class_voxels[v];
      const auto prev = phase_labels().find(id);
      if (prev != phase_labels().end()) {
        const LabelMap before = load_label_map(prev->second.path);
        for (std::size_t i = 0; i < fused.values().size(); ++i) changed += fused[i] != before[i];
        total += fused.values().size();
      }
    }
    summary.class_voxels[kBackground] = 0;
    summary.changed_fraction =
        total == 0 ? 1.0 : static_cast<double>(changed) / static_cast<double>(total);
    evaluate_heldout(summary);

    for (const auto& [id, p] : state_.cases) {
      if (p.status == CaseStatus::fused) phase_labels()[id] = *p.fused;
    }
    spdlog::info("{} round {}: {} labeled, {} failed, changed {:.4f}{}", to_string(phase_), state_.round,
                 summary.cases_labeled, summary.cases_failed, summary.changed_fraction,
                 summary.heldout_mean_dsc ? fmt::format(", held-out DSC {:.4f}", *summary.heldout_mean_dsc)
                                          : std::string());
    const auto& stop = in_.config.stop_change_fraction;
    if (stop && state_.round > 0 && summary.changed_fraction < *stop) {
      spdlog::info("{}: change below {} after round {}, stopping phase", to_string(phase_), *stop, state_.round);
      state_.phase_stopped = true;
    }
    state_.history.push_back(summary);
    state_.cases.clear();
    state_.stage = RoundStage::idle;
    ++state_.round;
    store_.save(state_);
  }

  PipelineState& state_;
  const PipelineInputs& in_;
  Phase phase_;
  ClassSet classes_;
  StateStore& store_;
  ModelSpace space_;
  fs::path dir_;
};

std::optional<LabelMap> load_external(const ExternalLabelSource& src, const std::string& id, const Dims& dims) {
  for (const char* ext : {".nii.gz", ".nii"}) {
    const fs::path p = src.dir / (id + ext);
    if (!fs::exists(p)) continue;
    LabelMap map = load_label_map(p);
    if (map.dims() != dims) {
      throw ShapeMismatch("external label " + p.string() + " has dims " + to_string(map.dims()) + ", expected " +
                          to_string(dims));
    }
    return map;
  }
  return std::nullopt;
}

FusionPolicy merge_policy(const PipelineInputs& in) {
  FusionPolicy policy = in.config.fusion;
  if (!in.config.fusion_priority_explicit) {
    policy.source_priority = {kSelfSource};
    for (const auto& s : in.manifest.pseudo_label_sources) policy.source_priority.push_back(s.id);
  }
  policy.validate();
  return policy;
}

}  // namespace

PipelineState open_state(StateStore& store, const PipelineInputs& in) {
  if (store.exists()) {
    PipelineState s = store.load();
    if (s.config_snapshot != in.config.snapshot) {
      spdlog::warn("configuration differs from the one the saved run started with; continuing");
    }
    for (auto& [id, p] : s.cases) {
      const bool pseudo_ok = p.pseudo && p.pseudo->intact();
      const bool fused_ok = p.fused && p.fused->intact();
      if (p.status == CaseStatus::fused && !fused_ok) {
        spdlog::warn("{}: fused label missing or modified, redoing case", id);
        p = pseudo_ok ? CaseProgress{.status = CaseStatus::pseudo_labeled, .pseudo = p.pseudo, .fused = std::nullopt} : CaseProgress{};
      } else if (p.status == CaseStatus::pseudo_labeled && !pseudo_ok) {
        spdlog::warn("{}: pseudo label missing or modified, redoing case", id);
        p = CaseProgress{};
      }
    }
    for (const auto& [phase, labels] : s.phase_labels) {
      for (const auto& [id, file] : labels) {
        if (!file.intact()) {
          throw Error("completed " + phase + " label for case " + id + " (" + file.path.string() +
                      ") is missing or modified; remove " + store.path().string() + " to start over");
        }
      }
    }
    for (auto it = s.final_labels.begin(); it != s.final_labels.end();) {
      if (it->second.intact()) {
        ++it;
        continue;
      }
      spdlog::warn("{}: final label missing or modified, merging again", it->first);
      it = s.final_labels.erase(it);
      if (s.phase == Phase::done) s.phase = Phase::merge;
    }
    spdlog::info("resuming at phase {} round {} ({})", to_string(s.phase), s.round, to_string(s.stage));
    return s;
  }
  PipelineState s;
  s.phase = in.config.phase_order.empty() ? Phase::merge : in.config.phase_order.front();
  s.config_snapshot = in.config.snapshot;
  if (in.config.preprocess_enabled) {
    s.target_spacing = in.config.target_spacing ? *in.config.target_spacing : median_spacing(in.manifest);
  }
  fs::create_directories(in.config.work_dir);
  store.save(s);
  return s;
}

PipelineState run_phase(PipelineState state, const PipelineInputs& in, Phase phase, StateStore& store) {
  if (phase != Phase::tumor && phase != Phase::organ) {
    throw InvalidArgument("run_phase expects the tumor or organ phase, got " + to_string(phase));
  }
  if (state.phase != phase) {
    throw InvalidArgument("state is at phase " + to_string(state.phase) + ", not " + to_string(phase));
  }
  in.config.segmenter.validate();
  RoundRunner(state, in, phase, store).run();
  return state;
}

bool advance_phase(PipelineState& state, const PipelineConfig& config, StateStore& store) {
  if (state.phase != Phase::tumor && state.phase != Phase::organ) return false;
  if (state.stage != RoundStage::idle) return false;
  if (state.round < config.rounds_for(state.phase) && !state.phase_stopped) return false;
  const auto& order = config.phase_order;
  auto it = std::find(order.begin(), order.end(), state.phase);
  Phase next = Phase::merge;
  if (it != order.end() && std::next(it) != order.end()) next = *std::next(it);
  spdlog::info("phase {} complete after {} rounds, next: {}", to_string(state.phase), state.round, to_string(next));
  state.phase = next;
  state.round = 0;
  state.phase_stopped = false;
  state.cases.clear();
  store.save(state);
  return true;
}

PipelineState run_merge(PipelineState state, const PipelineInputs& in, StateStore& store) {
  if (state.phase != Phase::merge) {
    throw InvalidArgument("state is at phase " + to_string(state.phase) + ", not merge");
  }
  const FusionPolicy policy = merge_policy(in);
  const auto phase_label = [&](Phase p, const std::string& id) -> std::optional<fs::path> {
    const auto it = state.phase_labels.find(to_string(p));
    if (it == state.phase_labels.end()) return std::nullopt;
    const auto jt = it->second.find(id);
    if (jt == it->second.end()) return std::nullopt;
    return jt->second.path;
  };

  std::vector<const CaseRecord*> todo;
  for (const auto& rec : in.manifest.cases) {
    if (!state.final_labels.count(rec.case_id)) todo.push_back(&rec);
  }
  std::mutex mutex;
  detail::parallel_for_each(todo.size(), in.config.workers, [&](std::size_t i) {
    const CaseRecord& rec = *todo[i];
    std::optional<fs::path> organ_path;
    std::optional<fs::path> tumor_path;
    {
      std::lock_guard lock(mutex);
      organ_path = phase_label(Phase::organ, rec.case_id);
      tumor_path = phase_label(Phase::tumor, rec.case_id);
    }
    const PartialLabel gt = load_ground_truth(rec);
    const LabelMap organ = restrict_classes(
        organ_path ? load_label_map(*organ_path) : restrict_partial(gt, organ_classes()).map, organ_classes());
    const LabelMap tumor = restrict_classes(
        tumor_path ? load_label_map(*tumor_path) : restrict_partial(gt, tumor_class()).map, tumor_class());
    LabelMap combined = merge_organ_tumor(organ, tumor, policy);
    if (!in.manifest.pseudo_label_sources.empty()) {
      std::vector<LabelSource> sources{{kSelfSource, combined}};
      for (const auto& src : in.manifest.pseudo_label_sources) {
        if (auto map = load_external(src, rec.case_id, combined.dims())) sources.push_back({src.id, std::move(*map)});
      }
      if (sources.size() > 1) combined = majority_vote(sources, policy);
    }
    const LabelMap final_map = merge_partial(gt, combined, policy);
    const LabelFile file = write_label(final_map, in.config.work_dir / "final" / (rec.case_id + ".nii.gz"));
    std::lock_guard lock(mutex);
    state.final_labels[rec.case_id] = file;
    store.save(state);
  });
  state.phase = Phase::done;
  store.save(state);
  return state;
}

json build_report(const PipelineState& state, const PipelineInputs& in) {
  const auto counts = count_status(in.manifest);
  json report{{"phase", to_string(state.phase)},
              {"status_counts",
               {{"full", counts.full},
                {"tumor_only", counts.tumor_only},
                {"organ_only", counts.organ_only},
                {"unlabeled", counts.unlabeled}}}};
  report["target_spacing"] = state.target_spacing
                                 ? json::array({state.target_spacing->dx, state.target_spacing->dy,
                                                state.target_spacing->dz})
                                 : json(nullptr);
  json rounds = json::array();
  for (const auto& h : state.history) {
    json voxels = json::object();
    for (std::size_t c = 1; c < kNumClasses; ++c) {
      if (h.class_voxels[c] > 0) voxels[kClassNames[c]] = h.class_voxels[c];
    }
    rounds.push_back({{"phase", to_string(h.phase)},
                      {"round", h.round},
                      {"cases_labeled", h.cases_labeled},
                      {"cases_failed", h.cases_failed},
                      {"changed_fraction", h.changed_fraction},
                      {"class_voxels", voxels},
                      {"heldout_mean_dsc", h.heldout_mean_dsc ? json(*h.heldout_mean_dsc) : json(nullptr)},
                      {"heldout_mean_nsd", h.heldout_mean_nsd ? json(*h.heldout_mean_nsd) : json(nullptr)}});
  }
  report["rounds"] = rounds;

  // Coverage of the final labels: how many cases contain each class.
  std::array<std::size_t, kNumClasses> class_cases{};
  std::vector<MetricReport> evaluations;
  for (const auto& rec : in.manifest.cases) {
    const auto it = state.final_labels.find(rec.case_id);
    if (it == state.final_labels.end()) continue;
    const LabelMap final_map = load_label_map(it->second.path);
    std::array<bool, kNumClasses> seen{};
    for (const auto v : final_map.values()) seen[v] = true;
    for (std::size_t c = 1; c < kNumClasses; ++c) class_cases[c] += seen[c];
    if (rec.annotation_status == AnnotationStatus::full) {
      evaluations.push_back(evaluate_case(final_map, load_ground_truth(rec).map, in.config.nsd, rec.case_id));
    }
  }
  json coverage{{"cases", state.final_labels.size()}};
  json per_class = json::object();
  for (std::size_t c = 1; c < kNumClasses; ++c) per_class[kClassNames[c]] = class_cases[c];
  coverage["cases_with_class"] = per_class;
  report["final_coverage"] = coverage;
  if (!evaluations.empty()) {
    const auto cohort = aggregate_cohort(evaluations);
    report["final_evaluation"] = to_json(cohort);
    std::ofstream(in.config.work_dir / "final_metrics.csv") << to_csv(cohort);
  } else {
    report["final_evaluation"] = nullptr;
  }
  return report;
}

json run_pipeline(const PipelineInputs& in, StateStore& store) {
  PipelineState state = open_state(store, in);
  while (true) {
    if (advance_phase(state, in.config, store)) continue;
    switch (state.phase) {
      case Phase::tumor:
      case Phase::organ:
        state = run_phase(std::move(state), in, state.phase, store);
        break;
      case Phase::merge:
        state = run_merge(std::move(state), in, store);
        break;
      case Phase::done: {
        json report = build_report(state, in);
        std::ofstream(in.config.work_dir / "report.json") << report.dump(2) << '\n';
        return report;
      }
    }
  }
}

}  // namespace ssl3d
