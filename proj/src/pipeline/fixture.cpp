#include "ssl3d/pipeline/fixture.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssl3d/fusion.hpp"
#include "ssl3d/nifti.hpp"
#include "ssl3d/subprocess.hpp"
#include "ssl3d/taxonomy.hpp"

namespace ssl3d {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Bit-reproducible across standard libraries: only the mt19937 output
// sequence is relied on, not the distribution implementations.
class Noise {
 public:
  explicit Noise(std::uint32_t seed) : rng_(seed) {}

  double uniform() { return static_cast<double>(rng_()) / 4294967296.0; }

  // Irwin-Hall sum of 12 uniforms: mean 0, variance 1.
  double normal() {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform();
    return s - 6.0;
  }

  double jitter(double amplitude) { return (2.0 * uniform() - 1.0) * amplitude; }

 private:
  std::mt19937 rng_;
};

struct Ellipsoid {
  std::array<double, 3> center;
  std::array<double, 3> radius;

  bool contains(std::size_t x, std::size_t y, std::size_t z) const {
    const double dx = (static_cast<double>(x) - center[0]) / radius[0];
    const double dy = (static_cast<double>(y) - center[1]) / radius[1];
    const double dz = (static_cast<double>(z) - center[2]) / radius[2];
    return dx * dx + dy * dy + dz * dz <= 1.0;
  }
};

struct Phantom {
  Image image;
  LabelMap label;  // full ground truth
};

Phantom make_phantom(const FixtureOptions& opt, std::uint32_t seed) {
  Noise noise(seed);
  const Dims d = opt.dims;
  const auto s = [&](double frac, int axis) { return frac * static_cast<double>(d[axis]); };
  const auto j = [&](double a) { return noise.jitter(a); };

  const Ellipsoid body{{s(0.5, 0), s(0.5, 1), s(0.5, 2)}, {s(0.46, 0), s(0.45, 1), s(0.46, 2)}};
  const Ellipsoid liver{{s(0.29, 0) + j(1.0), s(0.45, 1) + j(1.0), s(0.5, 2)},
                        {s(0.19, 0) + j(0.5), s(0.22, 1) + j(0.5), s(0.29, 2)}};
  const Ellipsoid tumor{{liver.center[0] + j(1.5), liver.center[1] + j(1.5), liver.center[2] + j(0.5)},
                        {3.5 + j(0.4), 3.5 + j(0.4), 2.2 + j(0.2)}};
  const Ellipsoid spleen{{s(0.71, 0) + j(1.0), s(0.35, 1) + j(1.0), s(0.5, 2)},
                         {s(0.125, 0), s(0.125, 1), s(0.21, 2)}};
  const Ellipsoid kidney{{s(0.69, 0) + j(0.5), s(0.72, 1) + j(0.5), s(0.5, 2)}, {4.0, 4.0, 4.0}};
  // Touches the kidney on its outer side.
  const Ellipsoid kidney_confounder{{kidney.center[0] + 5.5, kidney.center[1] + 3.0, kidney.center[2]},
                                    {2.2, 2.2, 1.6}};
  const Ellipsoid tumor_confounder{{s(0.5, 0) + j(1.0), s(0.83, 1), s(0.5, 2)}, {2.0, 2.0, 1.5}};

  Phantom p{Image(d, opt.spacing, static_cast<float>(phantom::kAir)), LabelMap(d, opt.spacing)};
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        double mean = phantom::kAir;
        std::uint8_t cls = kBackground;
        if (body.contains(x, y, z)) mean = phantom::kFat;
        if (liver.contains(x, y, z)) {
          mean = phantom::kLiver;
          cls = 1;
        }
        if (tumor.contains(x, y, z)) {
          mean = phantom::kTumor;
          cls = kTumor;
        }
        if (spleen.contains(x, y, z)) {
          mean = phantom::kSpleen;
          cls = 3;
        }
        if (kidney.contains(x, y, z)) {
          mean = phantom::kKidney;
          cls = 2;
        }
        if (kidney_confounder.contains(x, y, z) && cls == kBackground) mean = phantom::kKidneyConfounder;
        if (tumor_confounder.contains(x, y, z) && cls == kBackground) mean = phantom::kTumorConfounder;
        const std::size_t i = d.index(x, y, z);
        p.image[i] = static_cast<float>(std::round(mean + opt.noise_std * noise.normal()));
        p.label[i] = cls;
      }
    }
  }
  return p;
}

struct CaseSpec {
  std::string id;
  std::string status;
  ClassSet annotated;
};

json write_case(const fs::path& dir, const CaseSpec& spec, const Phantom& p) {
  const std::string image_rel = "images/" + spec.id + ".nii.gz";
  save_nifti(make_volume(p.image, ElemType::i16), dir / image_rel, true);
  json rec{{"case_id", spec.id}, {"image_path", image_rel}, {"annotation_status", spec.status}};
  if (spec.annotated.any()) {
    const std::string label_rel = "labels/" + spec.id + ".nii.gz";
    save_label_map(restrict_classes(p.label, spec.annotated), dir / label_rel);
    rec["label_path"] = label_rel;
  }
  return rec;
}

}  // namespace

FixturePaths write_fixture(const fs::path& dir, const FixtureOptions& options) {
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "labels");
  ClassSet organs_present;
  organs_present.set(1).set(2).set(3);
  const std::vector<CaseSpec> train{
      {"case_00", "full", all_foreground_classes()},
      {"case_01", "tumor_only", tumor_class()},
      {"case_02", "tumor_only", tumor_class()},
      {"case_03", "organ_only", organs_present},
      {"case_04", "unlabeled", {}},
      {"case_05", "unlabeled", {}},
  };
  const std::vector<CaseSpec> heldout{
      {"heldout_00", "full", all_foreground_classes()},
      {"heldout_01", "full", all_foreground_classes()},
  };

  json train_manifest = json::array();
  std::uint32_t seed = options.seed;
  for (const auto& c : train) train_manifest.push_back(write_case(dir, c, make_phantom(options, seed++)));
  json heldout_manifest = json::array();
  for (const auto& c : heldout) heldout_manifest.push_back(write_case(dir, c, make_phantom(options, seed++)));

  FixturePaths paths{dir / "manifest.json", dir / "heldout.json", {}};
  std::ofstream(paths.manifest) << train_manifest.dump(2) << '\n';
  std::ofstream(paths.heldout_manifest) << heldout_manifest.dump(2) << '\n';

  if (!options.segmenter_binary.empty()) {
    const std::string bin = shell_quote(fs::absolute(options.segmenter_binary).string());
    const json config{
        {"work_dir", "work"},
        {"rounds", {{"tumor", 2}, {"organ", 2}}},
        {"workers", 2},
        {"evaluation", {{"manifest", "heldout.json"}}},
        {"segmenter",
         {{"train_cmd", bin + " mock-segmenter train --train-dir {train_dir} --label-dir {label_dir} "
                              "--model-dir {model_dir}"},
          {"predict_cmd", bin + " mock-segmenter predict --input-dir {input_dir} --model-dir {model_dir} "
                                "--output-dir {output_dir} --mode probabilities"},
          {"output_mode", "probabilities"}}},
    };
    paths.config = dir / "config.json";
    std::ofstream(paths.config) << config.dump(2) << '\n';
  }
  return paths;
}

}  // namespace ssl3d
