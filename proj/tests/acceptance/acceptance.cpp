// Acceptance gate: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Set SSL3D_ACCEPT_SEED to replay the randomized
// kill schedule of criterion 8.

#include <signal.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "oracles.hpp"
#include "ssl3d/fusion.hpp"
#include "ssl3d/metrics.hpp"
#include "ssl3d/monitor.hpp"
#include "ssl3d/nifti.hpp"
#include "ssl3d/pipeline/fixture.hpp"
#include "ssl3d/pipeline/state.hpp"
#include "ssl3d/postprocess.hpp"
#include "ssl3d/preprocess.hpp"
#include "ssl3d/subprocess.hpp"
#include "ssl3d/tta.hpp"
#include "test_util.hpp"

using namespace ssl3d;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << std::fixed << v;
  return os.str();
}

// --- 1 --------------------------------------------------------------------------

Verdict metric_oracles() {
  Verdict v;
  const auto t0 = Clock::now();
  std::mt19937 rng(101);
  std::uniform_int_distribution<int> cls(0, 2);
  const Dims d{6, 6, 6};
  std::size_t compared = 0;
  for (int trial = 0; trial < 200 && v.pass; ++trial) {
    const auto sp = oracle::random_spacing(rng);
    LabelMap pred(d, sp), gt(d, sp);
    for (auto& x : pred.data()) x = std::uint8_t(cls(rng));
    for (auto& x : gt.data()) x = std::uint8_t(cls(rng));
    const double tau = std::uniform_real_distribution<double>(0.3, 4.0)(rng);
    const auto report = evaluate_case(pred, gt, NsdParams{tau});
    for (int c = 1; c <= 2; ++c) {
      std::vector<std::uint8_t> p(d.count()), g(d.count());
      for (std::size_t i = 0; i < d.count(); ++i) {
        p[i] = pred[i] == c;
        g[i] = gt[i] == c;
      }
      if (report.per_class[c].dsc != oracle::dsc(p, g)) v.fail("DSC differs at trial " + std::to_string(trial));
      if (report.per_class[c].nsd != oracle::nsd(p, g, d, sp, tau)) {
        v.fail("NSD differs at trial " + std::to_string(trial));
      }
      for (const auto* m : {&p, &g}) {
        const auto lib = edt(Mask(d, sp, *m), sp).distance;
        const auto ref = oracle::edt(*m, d, sp);
        for (std::size_t i = 0; i < ref.size(); ++i) {
          const bool both_inf = std::isinf(lib[i]) && std::isinf(ref[i]);
          if (!both_inf && !(std::abs(lib[i] - ref[i]) <= 1e-9)) {
            v.fail("EDT differs by " + std::to_string(std::abs(lib[i] - ref[i])) + " mm at trial " +
                   std::to_string(trial));
          }
        }
      }
      ++compared;
    }
  }
  const double elapsed = seconds_since(t0);
  if (elapsed >= 30.0) v.fail("took " + fmt(elapsed, 1) + " s");
  if (v.pass) v.detail = std::to_string(compared) + " class masks on 200 maps, " + fmt(elapsed, 2) + " s";
  return v;
}

// --- 2 --------------------------------------------------------------------------

Verdict normalization_constants() {
  Verdict v;
  const NormalizationParams params;
  const Image in(Dims{3, 1, 1}, Spacing{}, std::vector<float>{-2000.0f, 80.3f, 279.0f});
  const Image out = clip_normalize(in, params);
  const double want[] = {-7.427864, 0.0, 1.405233};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(std::abs(double(out[i]) - want[i]) <= 1e-6)) {
      v.fail("value " + std::to_string(i) + " = " + std::to_string(out[i]));
    }
  }
  if (params.clip_lo != -970.0 || params.clip_hi != 279.0 || params.mean != 80.3 || params.std != 141.4) {
    v.fail("default parameters changed");
  }
  if (v.pass) v.detail = "-2000 -> " + fmt(out[0], 6) + ", 80.3 -> " + fmt(out[1], 6) + ", 279 -> " + fmt(out[2], 6);
  return v;
}

// --- 3 --------------------------------------------------------------------------

Verdict fusion_oracles() {
  Verdict v;
  std::mt19937 rng(303);
  const Dims d{5, 5, 5};
  const std::vector<std::string> ids{"a", "b", "c", "d"};
  for (int trial = 0; trial < 200 && v.pass; ++trial) {
    const std::size_t k = 1 + std::size_t(trial) % 4;
    const int n_classes = 2 + trial % 5;
    std::vector<LabelSource> sources;
    for (std::size_t s = 0; s < k; ++s) {
      LabelMap m(d, Spacing{});
      for (auto& x : m.data()) x = std::uint8_t(rng() % std::uint32_t(n_classes));
      sources.push_back({ids[s], m});
    }
    FusionPolicy policy;
    policy.source_priority = ids;
    std::shuffle(policy.source_priority.begin(), policy.source_priority.end(), rng);
    if (trial % 3 == 1) policy.min_votes = 1 + std::size_t(trial) % k;
    std::vector<std::vector<std::uint8_t>> ranked;
    for (const auto& id : policy.source_priority) {
      for (const auto& s : sources) {
        if (s.id == id) ranked.push_back(s.map.values());
      }
    }
    if (majority_vote(sources, policy).values() != oracle::vote(ranked, policy.min_votes.value_or(0))) {
      v.fail("majority_vote differs from tally at trial " + std::to_string(trial));
    }

    // merge_partial under every policy switch keeps gt foreground.
    ClassSet annotated;
    for (int c = 1; c < kNumClasses; ++c) {
      if (rng() % 3 == 0) annotated.set(std::size_t(c));
    }
    if (annotated.none()) annotated.set(kTumor);
    const auto members_of = members(annotated);
    LabelMap gt(d, Spacing{}), pseudo(d, Spacing{});
    for (auto& x : gt.data()) x = rng() % 2 ? std::uint8_t(members_of[rng() % members_of.size()]) : 0;
    for (auto& x : pseudo.data()) x = std::uint8_t(rng() % kNumClasses);
    for (int bits = 0; bits < 8; ++bits) {
      FusionPolicy p;
      p.source_priority = {"self"};
      p.gt_overrides = bits & 1;
      p.tumor_overrides_organ = bits & 2;
      p.gt_background_trust = bits & 4;
      const auto merged = merge_partial(PartialLabel{gt, annotated}, pseudo, p);
      for (std::size_t i = 0; i < gt.size(); ++i) {
        if (gt[i] != 0 && merged[i] == 0) v.fail("merge_partial erased gt foreground");
        if (gt[i] != 0 && p.gt_overrides && merged[i] != gt[i]) v.fail("merge_partial changed a gt label");
      }
    }

    // merge_organ_tumor keeps the tumor voxel count.
    LabelMap organ(d, Spacing{}), tumor(d, Spacing{});
    for (auto& x : organ.data()) x = std::uint8_t(rng() % 14);
    for (auto& x : tumor.data()) x = rng() % 4 == 0 ? kTumor : 0;
    const auto fused = merge_organ_tumor(organ, tumor);
    if (voxel_count(fused, kTumor) != voxel_count(tumor, kTumor)) v.fail("tumor voxel count changed");
  }
  if (v.pass) v.detail = "200 vote instances, merge invariants under 8 policies";
  return v;
}

// --- 4 --------------------------------------------------------------------------

Verdict nifti_round_trip() {
  Verdict v;
  testutil::TempDir dir("accept_nifti");
  std::mt19937 rng(404);
  const ElemType types[] = {ElemType::u8, ElemType::i16, ElemType::u16, ElemType::f32};
  std::uniform_int_distribution<std::size_t> extent(1, 12);
  for (int trial = 0; trial < 100 && v.pass; ++trial) {
    const ElemType elem = types[trial % 4];
    const bool gz = (trial / 4) % 2;
    const Dims d{extent(rng), extent(rng), extent(rng)};
    const Spacing sp = oracle::random_spacing(rng);
    Image img(d, sp);
    for (auto& x : img.data()) {
      switch (elem) {
        case ElemType::u8: x = float(rng() % 256); break;
        case ElemType::i16: x = float(int(rng() % 65536) - 32768); break;
        case ElemType::u16: x = float(rng() % 65536); break;
        case ElemType::f32: x = std::uniform_real_distribution<float>(-1e4f, 1e4f)(rng); break;
      }
    }
    const fs::path path = dir / ("v" + std::to_string(trial) + (gz ? ".nii.gz" : ".nii"));
    save_nifti(make_volume(img, elem), path, gz);
    const Volume back = load_nifti(path);
    if (back.elem != elem) v.fail("datatype changed at trial " + std::to_string(trial));
    if (back.voxels.dims() != d) v.fail("dims changed at trial " + std::to_string(trial));
    if (back.voxels.values() != img.values()) v.fail("values changed at trial " + std::to_string(trial));
    if (!approx_equal(back.voxels.spacing(), sp, 1e-6)) v.fail("spacing changed at trial " + std::to_string(trial));
  }
  if (v.pass) v.detail = "100 volumes, u8/i16/u16/f32, plain and gzip";
  return v;
}

// --- 5 --------------------------------------------------------------------------

Verdict tta_identity() {
  Verdict v;
  std::mt19937 rng(505);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Dims d{2 + rng() % 6, 2 + rng() % 6, 1 + rng() % 5};
    std::vector<std::uint8_t> classes{0};
    for (std::uint8_t c = 1; c <= kTumor; ++c) {
      if (rng() % 4 == 0) classes.push_back(c);
    }
    if (classes.size() == 1) classes.push_back(kTumor);
    std::vector<Image> ch(classes.size(), Image(d, oracle::random_spacing(rng)));
    for (std::size_t i = 0; i < d.count(); ++i) {
      std::vector<double> raw(classes.size());
      double sum = 0.0;
      for (auto& r : raw) sum += (r = u(rng) + 1e-3);
      for (std::size_t c = 0; c < raw.size(); ++c) ch[c][i] = float(raw[c] / sum);
    }
    const ProbMap base(classes, ch);
    std::vector<std::pair<FlipSpec, ProbMap>> entries;
    for (const auto& f : enumerate_flips()) entries.emplace_back(f, apply_flip(base, f));
    const ProbMap agg = aggregate(entries);
    for (std::size_t c = 0; c < classes.size(); ++c) {
      for (std::size_t i = 0; i < d.count(); ++i) {
        worst = std::max(worst, double(std::abs(agg.channel(c)[i] - base.channel(c)[i])));
      }
    }
  }
  if (worst > 1e-6) v.fail("max deviation " + std::to_string(worst));
  std::ostringstream os;
  os << "50 maps, max deviation " << std::scientific << worst;
  if (v.pass) v.detail = os.str();
  return v;
}

// --- 6 --------------------------------------------------------------------------

Verdict postprocess_oracles() {
  Verdict v;
  std::mt19937 rng(606);
  const Dims d{6, 6, 6};
  for (int trial = 0; trial < 200 && v.pass; ++trial) {
    const auto raw = oracle::random_mask(rng, d.count(), 0.1 + 0.4 * double(trial) / 200.0);
    for (const int conn : {6, 26}) {
      const auto c = connectivity_from_int(conn);
      const auto cc = connected_components(Mask(d, Spacing{}, raw), c);
      const auto [ids, sizes] = oracle::components(raw, d, conn);
      if (cc.labels.values() != ids || cc.sizes != sizes) {
        v.fail("component labels differ at trial " + std::to_string(trial) + ", connectivity " +
               std::to_string(conn));
      }
      LabelMap labels(d, Spacing{}, raw);
      ClassSet one;
      one.set(1);
      const auto once = keep_largest(labels, one, c);
      if (keep_largest(once, one, c) != once) v.fail("keep_largest not idempotent at trial " + std::to_string(trial));
      const std::size_t largest = sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
      if (voxel_count(once, 1) != largest) v.fail("kept size differs from oracle at trial " + std::to_string(trial));
    }
  }
  if (v.pass) v.detail = "200 masks, 6- and 26-connectivity";
  return v;
}

// --- 7 and 8 --------------------------------------------------------------------

struct FixtureRun {
  fs::path root;
  FixturePaths paths;

  std::string command(const fs::path& work) const {
    return shell_quote(SSL3D_BIN) + " -q run --config " + shell_quote(paths.config.string()) + " --manifest " +
           shell_quote(paths.manifest.string()) + " --set work_dir=" + shell_quote(work.string()) + " >>" +
           shell_quote((work.string() + ".log")) + " 2>&1";
  }
};

std::map<std::string, std::string> final_digests(const fs::path& work) {
  std::map<std::string, std::string> out;
  for (const auto& [id, f] : StateStore(work / "state.json").load().final_labels) out[id] = file_digest(f.path);
  return out;
}

Verdict pipeline_trend(const FixtureRun& fx, double& clean_runtime) {
  Verdict v;
  const fs::path work = fx.root / "clean";
  const auto t0 = Clock::now();
  const int code = run_shell(fx.command(work));
  clean_runtime = seconds_since(t0);
  if (code != 0) {
    v.fail("pipeline exited with " + std::to_string(code));
    return v;
  }
  const auto state = StateStore(work / "state.json").load();
  std::ostringstream detail;
  for (const Phase phase : {Phase::tumor, Phase::organ}) {
    std::map<int, double> by_round;
    for (const auto& h : state.history) {
      if (h.phase == phase && h.heldout_mean_dsc) by_round[h.round] = *h.heldout_mean_dsc;
    }
    if (!by_round.count(0) || !by_round.count(1)) {
      v.fail("missing held-out scores for the " + to_string(phase) + " phase");
      continue;
    }
    detail << to_string(phase) << " DSC " << fmt(by_round[0]) << " -> " << fmt(by_round[1]) << ", ";
    if (by_round[1] < by_round[0]) {
      v.fail(to_string(phase) + " held-out DSC fell from " + fmt(by_round[0]) + " to " + fmt(by_round[1]));
    }
  }
  const auto manifest_cases = json::parse(std::ifstream(fx.paths.manifest)).size();
  if (state.final_labels.size() != manifest_cases) v.fail("not every case has a final label");
  for (const auto& [id, f] : state.final_labels) {
    const LabelMap m = load_label_map(f.path);
    bool organ = false;
    for (int c = kFirstOrgan; c <= kLastOrgan; ++c) organ = organ || voxel_count(m, c) > 0;
    if (!organ || voxel_count(m, kTumor) == 0) v.fail("final label of " + id + " lacks organ or tumor classes");
  }
  if (clean_runtime >= 120.0) v.fail("took " + fmt(clean_runtime, 1) + " s");
  if (v.pass) {
    detail << state.final_labels.size() << " final labels with organs and tumor, " << fmt(clean_runtime, 1) << " s";
    v.detail = detail.str();
  }
  return v;
}

Verdict resumability(const FixtureRun& fx, double clean_runtime, std::uint32_t seed) {
  Verdict v;
  const auto want = final_digests(fx.root / "clean");
  const fs::path work = fx.root / "killed";
  std::mt19937 rng(seed);
  // Three kills spread over roughly the first 90% of an uninterrupted run.
  std::uniform_real_distribution<double> delay(0.05 * clean_runtime, 0.3 * clean_runtime);
  std::ostringstream detail;
  detail << "seed " << seed << ", killed at";
  int interrupted = 0;
  for (int k = 0; k < 3; ++k) {
    const double wait_s = delay(rng);
    ChildProcess child(fx.command(work), SpawnOptions{.log_file = std::nullopt, .new_process_group = true});
    std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
    if (!child.try_wait()) {
      ::kill(-child.pid(), SIGKILL);
      ++interrupted;
    }
    child.wait();
    detail << ' ' << fmt(wait_s, 2) << "s";
  }
  if (run_shell(fx.command(work)) != 0) {
    v.fail("resumed run failed");
    return v;
  }
  if (interrupted < 3) v.fail("only " + std::to_string(interrupted) + " of 3 kills interrupted a running pipeline");
  const auto got = final_digests(work);
  if (got != want) v.fail("final labels differ from the uninterrupted run");
  if (v.pass) {
    detail << "; " << got.size() << " final labels bit-identical";
    v.detail = detail.str();
  }
  return v;
}

// --- 9 --------------------------------------------------------------------------

Verdict monitor_arithmetic() {
  Verdict v;
  const auto gb = [](double x) { return std::uint64_t(x * kBytesPerGb); };
  ResourceTrace flat, ramp;
  flat.append(0.0, gb(6));
  flat.append(10.0, gb(6));
  ramp.append(0.0, gb(4));
  ramp.append(10.0, gb(6));
  const double a = auc_above_floor(flat, 4.0);
  const double b = auc_above_floor(ramp, 4.0);
  const double over = efficiency_report(flat, 20.0).runtime_over_tolerance_s;
  const double within = efficiency_report(flat, 10.0).runtime_over_tolerance_s;
  if (std::abs(a - 20.0) > 1e-9) v.fail("flat trace AUC " + std::to_string(a));
  if (std::abs(b - 10.0) > 1e-9) v.fail("ramp AUC " + std::to_string(b));
  if (std::abs(over - 5.0) > 1e-9 || within != 0.0) v.fail("runtime over tolerance " + std::to_string(over));
  if (kRuntimeToleranceS != 15.0 || kMemoryFloorGb != 4.0) v.fail("tolerances changed");
  if (v.pass) v.detail = "AUC " + fmt(a, 9) + " and " + fmt(b, 9) + " GB*s, 20 s run is " + fmt(over, 9) + " s over";
  return v;
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  std::uint32_t seed = std::random_device{}();
  if (const char* s = std::getenv("SSL3D_ACCEPT_SEED")) seed = std::uint32_t(std::strtoul(s, nullptr, 10));

  testutil::TempDir root("acceptance");
  FixtureOptions opt;
  opt.segmenter_binary = SSL3D_BIN;
  const FixtureRun fx{root.path(), write_fixture(root / "fixture", opt)};
  double clean_runtime = 0.0;

  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"metric oracle suite", metric_oracles},
      {"normalization constants", normalization_constants},
      {"fusion oracle suite", fusion_oracles},
      {"NIfTI round trip", nifti_round_trip},
      {"TTA identity", tta_identity},
      {"post-processing oracles", postprocess_oracles},
      {"end-to-end pipeline trend", [&] { return pipeline_trend(fx, clean_runtime); }},
      {"resumability", [&] { return resumability(fx, clean_runtime, seed); }},
      {"monitor arithmetic", monitor_arithmetic},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << v.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
