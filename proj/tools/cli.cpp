#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "ssl3d/fusion.hpp"
#include "ssl3d/metrics.hpp"
#include "ssl3d/monitor.hpp"
#include "ssl3d/nifti.hpp"
#include "ssl3d/pipeline/config.hpp"
#include "ssl3d/pipeline/fixture.hpp"
#include "ssl3d/pipeline/manifest.hpp"
#include "ssl3d/pipeline/mock_segmenter.hpp"
#include "ssl3d/pipeline/pipeline.hpp"
#include "ssl3d/pipeline/state.hpp"
#include "ssl3d/postprocess.hpp"
#include "ssl3d/preprocess.hpp"
#include "ssl3d/tta.hpp"

namespace ssl3d::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flags shared by the pipeline-facing subcommands.
struct Common {
  std::string config;
  std::string manifest;
  std::string state;
  std::vector<std::string> overrides;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "Pipeline configuration (JSON)");
    app->add_option("--manifest", manifest, "Case manifest (JSON)");
    app->add_option("--state", state, "Pipeline state file (default: <work_dir>/state.json)");
    app->add_option("--set", overrides, "Configuration override, dotted key: --set fusion.min_votes=2");
  }

  // Without --config the built-in defaults apply, relative to the working dir.
  PipelineConfig load() const {
    if (!config.empty()) return load_config(config, overrides);
    json j = default_config_json();
    for (const auto& o : overrides) apply_override(j, o);
    return parse_config(j, fs::current_path());
  }

  Manifest require_manifest() const {
    if (manifest.empty()) throw InvalidArgument("--manifest is required");
    return load_manifest(manifest);
  }

  fs::path state_path(const PipelineConfig& c) const {
    return state.empty() ? c.work_dir / "state.json" : fs::path(state);
  }
};

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw InvalidArgument("not an integer list: '" + s + "'");
    }
  }
  return out;
}

ClassSet parse_class_set(const std::string& s) {
  ClassSet set;
  for (const int c : parse_int_list(s)) {
    if (!is_foreground_class(c)) throw InvalidArgument("class out of range 1..14: " + std::to_string(c));
    set.set(static_cast<std::size_t>(c));
  }
  return set;
}

Spacing parse_spacing(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
  if (v.size() != 3) throw InvalidArgument("spacing needs three comma-separated values: '" + s + "'");
  Spacing sp{v[0], v[1], v[2]};
  sp.validate();
  return sp;
}

std::unique_ptr<StateStore> make_store(const fs::path& path) {
  auto store = std::make_unique<StateStore>(path);
  if (const char* crash = std::getenv("SSL3D_CRASH_AFTER_SAVES")) store->crash_after(std::atoi(crash));
  return store;
}

void print_history(const PipelineState& s) {
  std::cout << "phase   round  labeled  failed  changed   heldout_dsc\n";
  for (const auto& h : s.history) {
    std::cout << fmt::format("{:<7} {:>5}  {:>7}  {:>6}  {:>7.4f}   {}\n", to_string(h.phase), h.round,
                             h.cases_labeled, h.cases_failed, h.changed_fraction,
                             h.heldout_mean_dsc ? fmt::format("{:.4f}", *h.heldout_mean_dsc) : "-");
  }
}

void print_summary(const CohortSummary& summary) {
  std::cout << fmt::format("{:<22} {:>8} {:>8} {:>8} {:>8}\n", "class", "DSC", "DSC_sd", "NSD", "NSD_sd");
  for (const auto& r : summary.rows) {
    std::cout << fmt::format("{:<22} {:>8.4f} {:>8.4f} {:>8.4f} {:>8.4f}\n", r.name, r.dsc_mean, r.dsc_std,
                             r.nsd_mean, r.nsd_std);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

std::optional<Manifest> heldout_for(const PipelineConfig& c) {
  if (!c.heldout_manifest) return std::nullopt;
  return load_manifest(*c.heldout_manifest);
}

// --- run / phase / fuse -------------------------------------------------------

struct RunCmd {
  Common common;
  std::string report;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("run", "Run all phases and the final merge (resumes from saved state)");
    common.attach(app);
    app->add_option("--report", report, "Also write the final report JSON here");
    app->callback([this] { exec(); });
  }

  void exec() {
    const auto config = common.load();
    const auto manifest = common.require_manifest();
    const auto heldout = heldout_for(config);
    const PipelineInputs in{manifest, config.segmenter, config, heldout ? &*heldout : nullptr};
    auto store = make_store(common.state_path(config));
    const json rep = run_pipeline(in, *store);
    print_history(store->load());
    if (!rep["final_evaluation"].is_null()) {
      std::cout << "final labels vs. full annotations:\n";
      for (const auto& row : rep["final_evaluation"]["summary"]) {
        std::cout << fmt::format("  {:<22} DSC {:.4f}  NSD {:.4f}\n", row["class"].get<std::string>(),
                                 row["dsc_mean"].get<double>(), row["nsd_mean"].get<double>());
      }
    }
    if (!report.empty()) write_text(report, rep.dump(2) + "\n");
  }
};

struct PhaseCmd {
  Common common;
  std::string phase;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("phase", "Run one round of the tumor or organ phase");
    common.attach(app);
    app->add_option("--phase", phase, "tumor or organ")->required()->check(CLI::IsMember({"tumor", "organ"}));
    app->callback([this] { exec(); });
  }

  void exec() {
    const auto config = common.load();
    const auto manifest = common.require_manifest();
    const auto heldout = heldout_for(config);
    const PipelineInputs in{manifest, config.segmenter, config, heldout ? &*heldout : nullptr};
    auto store = make_store(common.state_path(config));
    PipelineState state = open_state(*store, in);
    const Phase wanted = parse_phase(phase);
    while (state.phase != wanted && advance_phase(state, config, *store)) {
    }
    state = run_phase(std::move(state), in, wanted, *store);
    print_history(state);
  }
};

struct FuseCmd {
  Common common;
  std::string organ;
  std::string tumor;
  std::string gt;
  std::string annotated;
  std::vector<std::string> sources;
  std::string out;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand(
        "fuse",
        "Fuse label files (--organ/--tumor/--source/--gt), or run the pipeline merge step when none are given");
    common.attach(app);
    app->add_option("--organ", organ, "Organ label map");
    app->add_option("--tumor", tumor, "Tumor label map");
    app->add_option("--source", sources, "Extra voting source as id=path; 'self' is the organ/tumor merge");
    app->add_option("--gt", gt, "Partial ground truth merged last");
    app->add_option("--annotated", annotated, "Classes annotated in --gt, e.g. 14 or 1,2,3 (default: all)");
    app->add_option("--out", out, "Output label map");
    app->callback([this] { exec(); });
  }

  void exec() {
    const auto config = common.load();
    if (organ.empty() && tumor.empty() && sources.empty() && gt.empty()) return run_merge_step(config);
    if (out.empty()) throw InvalidArgument("--out is required when fusing files");
    FusionPolicy policy = config.fusion;

    std::optional<LabelMap> combined;
    if (!organ.empty() || !tumor.empty()) {
      std::optional<LabelMap> o = organ.empty() ? std::nullopt : std::optional(load_label_map(organ));
      std::optional<LabelMap> t = tumor.empty() ? std::nullopt : std::optional(load_label_map(tumor));
      const LabelMap& shape = o ? *o : *t;
      combined = merge_organ_tumor(o ? *o : LabelMap(shape.dims(), shape.spacing()),
                                   t ? *t : LabelMap(shape.dims(), shape.spacing()), policy);
    }
    if (!sources.empty()) {
      std::vector<LabelSource> votes;
      if (combined) votes.push_back({"self", *combined});
      for (const auto& s : sources) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw InvalidArgument("--source expects id=path, got '" + s + "'");
        votes.push_back({s.substr(0, eq), load_label_map(s.substr(eq + 1))});
      }
      if (!config.fusion_priority_explicit) {
        policy.source_priority.clear();
        for (const auto& v : votes) policy.source_priority.push_back(v.id);
      }
      combined = majority_vote(votes, policy);
    }
    if (!gt.empty()) {
      const ClassSet classes = annotated.empty() ? all_foreground_classes() : parse_class_set(annotated);
      PartialLabel partial{restrict_classes(load_label_map(gt), classes), classes};
      if (!combined) combined = LabelMap(partial.map.dims(), partial.map.spacing());
      combined = merge_partial(partial, *combined, policy);
    }
    save_label_map(*combined, out);
    std::cout << "wrote " << out << '\n';
  }

  void run_merge_step(const PipelineConfig& config) {
    const auto manifest = common.require_manifest();
    const PipelineInputs in{manifest, config.segmenter, config, nullptr};
    auto store = make_store(common.state_path(config));
    PipelineState state = open_state(*store, in);
    while (state.phase != Phase::merge && state.phase != Phase::done) {
      if (!advance_phase(state, config, *store)) {
        throw InvalidArgument("phase " + to_string(state.phase) + " has rounds left; run them first");
      }
    }
    if (state.phase == Phase::merge) state = run_merge(std::move(state), in, *store);
    std::cout << "final labels: " << state.final_labels.size() << " cases in "
              << (config.work_dir / "final").string() << '\n';
  }
};

// --- evaluate -----------------------------------------------------------------

struct EvaluateCmd {
  Common common;
  std::string pred;
  std::string gt;
  std::string out;
  std::string json_out;
  bool all_organs = false;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("evaluate", "Per-class DSC and NSD of predicted label maps");
    common.attach(app);
    app->add_option("--pred", pred, "Directory of predicted <case>.nii.gz")->required();
    app->add_option("--gt", gt, "Directory of reference labels (or use --manifest)");
    app->add_option("--out", out, "Cohort summary CSV");
    app->add_option("--json", json_out, "Per-case and cohort JSON");
    app->add_flag("--all-organs", all_organs, "Average all 13 organs per case, absent ones scoring 1");
    app->callback([this] { exec(); });
  }

  void exec() {
    const auto config = common.load();
    std::vector<std::pair<std::string, fs::path>> refs;  // case id, reference
    if (!gt.empty()) {
      for (const auto& e : fs::directory_iterator(gt)) {
        const auto stem = nifti_stem(e.path());
        if (!stem.empty()) refs.emplace_back(stem, e.path());
      }
    } else if (!common.manifest.empty()) {
      for (const auto& c : load_manifest(common.manifest).cases) {
        if (c.annotation_status == AnnotationStatus::full) refs.emplace_back(c.case_id, *c.label_path);
      }
    } else {
      throw InvalidArgument("give --gt or --manifest");
    }
    std::sort(refs.begin(), refs.end());
    if (refs.empty()) throw InvalidArgument("no reference label maps found");
    std::vector<MetricReport> reports;
    for (const auto& [id, ref] : refs) {
      fs::path p = fs::path(pred) / (id + ".nii.gz");
      if (!fs::exists(p)) p = fs::path(pred) / (id + ".nii");
      if (!fs::exists(p)) throw InvalidArgument("no prediction for case " + id + " in " + pred);
      reports.push_back(evaluate_case(load_label_map(p), load_label_map(ref), config.nsd, id,
                                      all_organs ? PresencePolicy::all : PresencePolicy::present));
    }
    const auto summary = aggregate_cohort(reports);
    print_summary(summary);
    if (!out.empty()) write_text(out, to_csv(summary));
    if (!json_out.empty()) write_text(json_out, to_json(summary).dump(2) + "\n");
  }
};

// --- preprocess ---------------------------------------------------------------

struct PreprocessCmd {
  Common common;
  std::string in;
  std::string out;
  std::string label_in;
  std::string label_out;
  std::string spacing;
  std::string out_dir;
  bool no_resample = false;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand(
        "preprocess", "Clip/normalize and resample an image (and label), or every manifest case into --out-dir");
    common.attach(app);
    app->add_option("--in", in, "Input image");
    app->add_option("--out", out, "Output image");
    app->add_option("--label", label_in, "Input label map resampled alongside");
    app->add_option("--label-out", label_out, "Output label map");
    app->add_option("--spacing", spacing, "Target spacing dx,dy,dz in mm (default: config, else manifest median)");
    app->add_option("--out-dir", out_dir, "With --manifest: output directory for all cases");
    app->add_flag("--no-resample", no_resample, "Only clip and normalize");
    app->callback([this] { exec(); });
  }

  std::optional<Spacing> target(const PipelineConfig& config) const {
    if (no_resample) return std::nullopt;
    if (!spacing.empty()) return parse_spacing(spacing);
    if (config.target_spacing) return config.target_spacing;
    if (!common.manifest.empty()) return median_spacing(load_manifest(common.manifest));
    throw InvalidArgument("no target spacing: give --spacing, a config target, --manifest or --no-resample");
  }

  void process(const PipelineConfig& config, const std::optional<Spacing>& t, const fs::path& src,
               const fs::path& dst, const std::optional<fs::path>& lsrc, const std::optional<fs::path>& ldst) {
    Image img = clip_normalize(load_image(src), config.normalization);
    if (t) img = resample_image(img, ResampleSpec{.target = *t});
    save_image(img, dst);
    if (lsrc && ldst) {
      LabelMap lab = load_label_map(*lsrc);
      if (t) lab = resample_labels(lab, ResampleSpec{.target = *t});
      save_label_map(lab, *ldst);
    }
  }

  void exec() {
    const auto config = common.load();
    const auto t = target(config);
    if (!in.empty()) {
      if (out.empty()) throw InvalidArgument("--out is required with --in");
      if (!label_in.empty() && label_out.empty()) throw InvalidArgument("--label-out is required with --label");
      process(config, t, in, out, label_in.empty() ? std::nullopt : std::optional<fs::path>(label_in),
              label_out.empty() ? std::nullopt : std::optional<fs::path>(label_out));
      std::cout << "wrote " << out << '\n';
      return;
    }
    if (out_dir.empty()) throw InvalidArgument("give --in/--out, or --manifest with --out-dir");
    const auto manifest = common.require_manifest();
    const fs::path dir(out_dir);
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "labels");
    for (const auto& c : manifest.cases) {
      std::optional<fs::path> lsrc = c.label_path;
      std::optional<fs::path> ldst;
      if (lsrc) ldst = dir / "labels" / (c.case_id + ".nii.gz");
      process(config, t, c.image_path, dir / "images" / (c.case_id + ".nii.gz"), lsrc, ldst);
    }
    if (t) std::cout << fmt::format("target spacing {}, {}, {} mm\n", t->dx, t->dy, t->dz);
    std::cout << "preprocessed " << manifest.cases.size() << " cases into " << dir.string() << '\n';
  }
};

// --- tta / postprocess --------------------------------------------------------

struct TtaCmd {
  std::string input;
  std::string output;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand(
        "tta", "Aggregate flipped probability maps <case>__flip<k>_prob_<c>.nii.gz into <case>.nii.gz labels");
    app->add_option("--input-dir", input, "Directory of flipped probability maps")->required();
    app->add_option("--output-dir", output, "Directory for label maps")->required();
    app->callback([this] { exec(); });
  }

  void exec() {
    // case -> flip index -> class -> path
    std::map<std::string, std::map<int, std::map<int, fs::path>>> files;
    for (const auto& e : fs::directory_iterator(input)) {
      const std::string stem = nifti_stem(e.path());
      const auto f = stem.rfind("__flip");
      const auto p = stem.rfind("_prob_");
      if (f == std::string::npos || p == std::string::npos || p < f) continue;
      files[stem.substr(0, f)][std::stoi(stem.substr(f + 6, p - f - 6))][std::stoi(stem.substr(p + 6))] = e.path();
    }
    if (files.empty()) throw InvalidArgument("no flipped probability maps in " + input);
    fs::create_directories(output);
    const auto flips = enumerate_flips();
    for (const auto& [id, by_flip] : files) {
      std::vector<std::pair<FlipSpec, ProbMap>> entries;
      for (const auto& [k, by_class] : by_flip) {
        if (k < 0 || k >= static_cast<int>(flips.size())) throw InvalidArgument("bad flip index for " + id);
        std::vector<std::uint8_t> classes;
        std::vector<Image> channels;
        for (const auto& [c, path] : by_class) {
          classes.push_back(static_cast<std::uint8_t>(c));
          channels.push_back(load_image(path));
        }
        entries.emplace_back(flips[static_cast<std::size_t>(k)], ProbMap(std::move(classes), std::move(channels)));
      }
      save_label_map(argmax_labels(aggregate(entries)), fs::path(output) / (id + ".nii.gz"));
      std::cout << id << ": " << entries.size() << " flips\n";
    }
  }
};

struct PostprocessCmd {
  std::string in;
  std::string out;
  std::string classes = "1,2,3,4,5,6,7,8,9,10,11,12,13";
  int connectivity = 26;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("postprocess", "Keep the largest connected component per class");
    app->add_option("--in", in, "Input label map")->required();
    app->add_option("--out", out, "Output label map")->required();
    app->add_option("--classes", classes, "Classes to filter")->capture_default_str();
    app->add_option("--connectivity", connectivity, "6 or 26")->capture_default_str()->check(CLI::IsMember({6, 26}));
    app->callback([this] { exec(); });
  }

  void exec() {
    save_label_map(keep_largest(load_label_map(in), parse_class_set(classes), connectivity_from_int(connectivity)),
                   out);
    std::cout << "wrote " << out << '\n';
  }
};

// --- monitor ------------------------------------------------------------------

struct MonitorCmd {
  std::string cmd;
  std::string probe = kRssProbe;
  double period = 0.1;
  double floor_gb = kMemoryFloorGb;
  std::string out;
  std::string trace_out;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("monitor", "Run a command and score its runtime and memory-time area");
    app->add_option("--cmd", cmd, "Command to run (through /bin/sh)")->required();
    app->add_option("--probe", probe, "'rss' or a command printing bytes; {pid} is the monitored pid")->capture_default_str();
    app->add_option("--period", period, "Sampling period in seconds")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--floor-gb", floor_gb, "Memory floor in GB")->capture_default_str()->check(CLI::NonNegativeNumber);
    app->add_option("--out", out, "Efficiency report JSON");
    app->add_option("--trace", trace_out, "Raw trace JSON");
    app->callback([this] { exec(); });
  }

  void exec() {
    const SampledRun run = sample_run(cmd, probe, period);
    EfficiencyReport rep = efficiency_report(run.trace, run.runtime_s);
    rep.mem_auc_gb_s = auc_above_floor(run.trace, floor_gb);
    json j = to_json(rep);
    j["exit_status"] = run.exit_status;
    j["samples"] = run.trace.samples.size();
    std::cout << j.dump(2) << '\n';
    if (!out.empty()) write_text(out, j.dump(2) + "\n");
    if (!trace_out.empty()) write_text(trace_out, to_json(run.trace).dump(2) + "\n");
  }
};

// --- mock segmenter and fixture -----------------------------------------------

struct MockCmd {
  std::string train_dir;
  std::string label_dir;
  std::string model_dir;
  std::string input_dir;
  std::string output_dir;
  std::string mode = "probabilities";
  MockParams params;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("mock-segmenter", "Deterministic intensity-band segmenter for testing");
    app->require_subcommand(1);
    auto* train = app->add_subcommand("train", "Fit per-class intensity bands");
    train->add_option("--train-dir", train_dir, "Training images")->required();
    train->add_option("--label-dir", label_dir, "Training labels, same file names")->required();
    train->add_option("--model-dir", model_dir, "Output model directory")->required();
    train->add_option("--k", params.k, "Band half-width in class standard deviations")->capture_default_str();
    train->add_option("--prior", params.prior, "Band widening for few training cases")->capture_default_str();
    train->add_option("--temperature", params.temperature, "Sigmoid softness")->capture_default_str();
    train->callback([this] { mock_train_dirs(train_dir, label_dir, model_dir, params); });
    auto* predict = app->add_subcommand("predict", "Write probability or label maps for every input image");
    predict->add_option("--input-dir", input_dir, "Input images")->required();
    predict->add_option("--model-dir", model_dir, "Model directory from train")->required();
    predict->add_option("--output-dir", output_dir, "Output directory")->required();
    predict->add_option("--mode", mode, "probabilities or labels")->capture_default_str()
        ->check(CLI::IsMember({"probabilities", "labels"}));
    predict->callback([this] { mock_predict_dirs(input_dir, model_dir, output_dir, parse_output_mode(mode)); });
  }
};

struct FixtureCmd {
  std::string out;
  std::uint32_t seed = FixtureOptions{}.seed;
  bool no_config = false;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("make-fixture", "Write the synthetic phantom cases, manifests and config");
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--seed", seed, "Noise and geometry seed")->capture_default_str();
    app->add_flag("--no-config", no_config, "Skip config.json");
    app->callback([this] { exec(); });
  }

  void exec() {
    FixtureOptions opt;
    opt.seed = seed;
    if (!no_config) opt.segmenter_binary = fs::canonical("/proc/self/exe");
    const auto paths = write_fixture(out, opt);
    std::cout << "manifest: " << paths.manifest.string() << "\nheld-out: " << paths.heldout_manifest.string()
              << '\n';
    if (!paths.config.empty()) std::cout << "config:   " << paths.config.string() << '\n';
  }
};

}  // namespace

int dispatch(int argc, char** argv) {
  CLI::App app{"Partial-label semi-supervised 3D segmentation toolkit"};
  app.name("ssl3d");
  app.require_subcommand(1);
  bool verbose = false;
  bool quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  RunCmd run;
  PhaseCmd phase;
  FuseCmd fuse;
  EvaluateCmd evaluate;
  PreprocessCmd preprocess;
  TtaCmd tta;
  PostprocessCmd postprocess;
  MonitorCmd monitor;
  MockCmd mock;
  FixtureCmd fixture;
  run.attach(app);
  phase.attach(app);
  fuse.attach(app);
  evaluate.attach(app);
  preprocess.attach(app);
  tta.attach(app);
  postprocess.attach(app);
  monitor.attach(app);
  mock.attach(app);
  fixture.attach(app);

  app.parse_complete_callback([&] {
    spdlog::set_default_logger(
        std::make_shared<spdlog::logger>("ssl3d", std::make_shared<spdlog::sinks::stderr_color_sink_mt>()));
    spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
    spdlog::set_level(verbose ? spdlog::level::debug : quiet ? spdlog::level::warn : spdlog::level::info);
  });

  if (argc <= 1) {
    std::cerr << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitDomainError;
  }
  return kExitOk;
}

}  // namespace ssl3d::cli
