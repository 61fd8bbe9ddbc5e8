#include "ssl3d/pipeline/mock_segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "ssl3d/nifti.hpp"

namespace ssl3d {

namespace fs = std::filesystem;

double MockClassModel::half_width(const MockParams& p) const {
  const double n = std::max<double>(1.0, static_cast<double>(n_cases));
  return p.k * std * (1.0 + p.prior / n);
}

namespace {

// Median of v (mean of the two middle values for even sizes); reorders v.
double median_of(std::vector<double>& v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

// Scales the median absolute deviation to the standard deviation of a
// normal distribution.
constexpr double kMadToStd = 1.4826;

}  // namespace

// Center and spread are the median and the scaled MAD of the labeled
// intensities, so a few mislabeled voxels in pseudo labels do not widen the
// band.
MockModel train_mock_model(const std::vector<TrainingPair>& cases, const MockParams& params) {
  std::map<std::uint8_t, std::vector<double>> values;
  std::map<std::uint8_t, std::size_t> case_counts;
  for (const auto& tc : cases) {
    require_same_shape(tc.image, tc.label, "mock train");
    std::array<bool, kNumClasses> seen{};
    const auto img = tc.image.data();
    const auto lab = tc.label.data();
    for (std::size_t i = 0; i < img.size(); ++i) {
      const auto c = lab[i];
      if (c == kBackground || c >= kNumClasses) continue;
      values[c].push_back(img[i]);
      seen[c] = true;
    }
    for (std::size_t c = 1; c < kNumClasses; ++c) {
      if (seen[c]) ++case_counts[static_cast<std::uint8_t>(c)];
    }
  }
  MockModel m;
  m.params = params;
  for (auto& [c, v] : values) {
    MockClassModel cm;
    cm.class_id = c;
    cm.n_voxels = v.size();
    cm.n_cases = case_counts[c];
    cm.mean = median_of(v);
    for (auto& x : v) x = std::abs(x - cm.mean);
    cm.std = std::max(kMadToStd * median_of(v), 1e-3);
    m.classes.push_back(cm);
  }
  return m;
}

ProbMap mock_predict(const MockModel& model, const Image& image) {
  constexpr double kBackgroundScore = 0.5;
  constexpr double kClip = 1e-3;
  std::vector<std::uint8_t> classes{kBackground};
  for (const auto& c : model.classes) classes.push_back(c.class_id);
  std::vector<Image> channels(classes.size(), Image(image.dims(), image.spacing()));
  std::vector<double> hw;
  for (const auto& c : model.classes) hw.push_back(c.half_width(model.params));

  const auto in = image.data();
  const auto n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < n; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    std::array<double, kNumClasses> raw{};
    double sum = kBackgroundScore;
    raw[0] = kBackgroundScore;
    for (std::size_t k = 0; k < model.classes.size(); ++k) {
      const auto& c = model.classes[k];
      const double d = hw[k] - std::abs(static_cast<double>(in[i]) - c.mean);
      const double s = 1.0 / (1.0 + std::exp(-d / (model.params.temperature * c.std)));
      raw[k + 1] = std::clamp(s, kClip, 1.0 - kClip);
      sum += raw[k + 1];
    }
    for (std::size_t k = 0; k < classes.size(); ++k) {
      channels[k][i] = static_cast<float>(raw[k] / sum);
    }
  }
  return ProbMap(std::move(classes), std::move(channels));
}

nlohmann::json to_json(const MockModel& m) {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& c : m.classes) {
    classes.push_back({{"class_id", c.class_id},
                       {"mean", c.mean},
                       {"std", c.std},
                       {"n_cases", c.n_cases},
                       {"n_voxels", c.n_voxels}});
  }
  return {{"k", m.params.k},
          {"prior", m.params.prior},
          {"temperature", m.params.temperature},
          {"classes", std::move(classes)}};
}

MockModel mock_model_from_json(const nlohmann::json& j) {
  MockModel m;
  m.params.k = j.at("k").get<double>();
  m.params.prior = j.at("prior").get<double>();
  m.params.temperature = j.at("temperature").get<double>();
  for (const auto& c : j.at("classes")) {
    MockClassModel cm;
    cm.class_id = c.at("class_id").get<std::uint8_t>();
    cm.mean = c.at("mean").get<double>();
    cm.std = c.at("std").get<double>();
    cm.n_cases = c.at("n_cases").get<std::size_t>();
    cm.n_voxels = c.at("n_voxels").get<std::size_t>();
    m.classes.push_back(cm);
  }
  std::sort(m.classes.begin(), m.classes.end(),
            [](const auto& a, const auto& b) { return a.class_id < b.class_id; });
  return m;
}

std::string nifti_stem(const fs::path& p) {
  const std::string name = p.filename().string();
  for (const std::string ext : {".nii.gz", ".nii"}) {
    if (name.size() > ext.size() && name.compare(name.size() - ext.size(), ext.size(), ext) == 0) {
      return name.substr(0, name.size() - ext.size());
    }
  }
  return {};
}

namespace {

std::vector<fs::path> nifti_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InvalidArgument("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!nifti_stem(e.path()).empty()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

const char* kModelFile = "mock_model.json";

}  // namespace

void mock_train_dirs(const fs::path& train_dir, const fs::path& label_dir, const fs::path& model_dir,
                     const MockParams& params) {
  std::vector<TrainingPair> cases;
  for (const auto& img : nifti_files(train_dir)) {
    const auto stem = nifti_stem(img);
    fs::path lab = label_dir / (stem + ".nii.gz");
    if (!fs::exists(lab)) lab = label_dir / (stem + ".nii");
    if (!fs::exists(lab)) throw InvalidArgument("no label for training image " + img.string());
    cases.push_back({load_image(img), load_label_map(lab)});
  }
  if (cases.empty()) throw InvalidArgument("no training images in " + train_dir.string());
  const auto model = train_mock_model(cases, params);
  fs::create_directories(model_dir);
  std::ofstream out(model_dir / kModelFile, std::ios::trunc);
  out << to_json(model).dump(2) << '\n';
  if (!out) throw Error("cannot write model to " + model_dir.string());
}

void mock_predict_dirs(const fs::path& input_dir, const fs::path& model_dir, const fs::path& output_dir,
                       OutputMode mode) {
  std::ifstream in(model_dir / kModelFile);
  if (!in) throw InvalidArgument("no model in " + model_dir.string());
  nlohmann::json j;
  in >> j;
  const auto model = mock_model_from_json(j);
  fs::create_directories(output_dir);
  for (const auto& img_path : nifti_files(input_dir)) {
    const auto stem = nifti_stem(img_path);
    const auto probs = mock_predict(model, load_image(img_path));
    if (mode == OutputMode::labels) {
      save_label_map(argmax_labels(probs), output_dir / (stem + ".nii.gz"));
      continue;
    }
    for (std::size_t k = 0; k < probs.num_classes(); ++k) {
      save_image(probs.channel(k),
                 output_dir / (stem + "_prob_" + std::to_string(probs.classes()[k]) + ".nii.gz"));
    }
  }
}

}  // namespace ssl3d
