#include "ssl3d/tta.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ssl3d {

std::string to_string(const FlipSpec& f) {
  std::string s;
  if (f.flip_x) s += "x";
  if (f.flip_y) s += "y";
  if (f.flip_z) s += "z";
  return s.empty() ? "none" : s;
}

std::vector<FlipSpec> enumerate_flips() {
  std::vector<FlipSpec> out;
  for (int bits = 0; bits < 8; ++bits) {
    out.push_back(FlipSpec{(bits & 4) != 0, (bits & 2) != 0, (bits & 1) != 0});
  }
  return out;
}

ProbMap::ProbMap(std::vector<std::uint8_t> classes, std::vector<Image> channels)
    : classes_(std::move(classes)), channels_(std::move(channels)) {
  if (classes_.empty() || classes_.size() != channels_.size()) {
    throw InvalidArgument("prob map needs one channel per class");
  }
  if (!std::is_sorted(classes_.begin(), classes_.end()) ||
      std::adjacent_find(classes_.begin(), classes_.end()) != classes_.end()) {
    throw InvalidArgument("prob map classes must be strictly increasing");
  }
  if (classes_.back() >= kNumClasses) throw InvalidArgument("prob map class exceeds 14");
  for (const auto& c : channels_) {
    require_same_shape(c, channels_.front(), "prob map channel");
  }
}

void ProbMap::validate(double tol) const {
  const std::size_t n = channels_.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (const auto& c : channels_) {
      const double p = c[i];
      if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("probability outside [0, 1]");
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw InvalidArgument("class probabilities do not sum to 1 at voxel " + std::to_string(i));
    }
  }
}

ProbMap apply_flip(const ProbMap& prob, const FlipSpec& spec) {
  std::vector<Image> channels;
  channels.reserve(prob.num_classes());
  for (const auto& c : prob.channels()) channels.push_back(apply_flip(c, spec));
  return ProbMap(prob.classes(), std::move(channels));
}

ProbMap aggregate(const std::vector<std::pair<FlipSpec, ProbMap>>& probs) {
  if (probs.empty()) throw InvalidArgument("aggregate: no entries");
  const auto& ref = probs.front().second;
  for (const auto& [spec, p] : probs) {
    if (p.dims() != ref.dims()) throw ShapeMismatch("aggregate: dim mismatch between entries");
    if (p.classes() != ref.classes()) throw ShapeMismatch("aggregate: class mismatch between entries");
  }
  const std::size_t n = ref.channel(0).size();
  const std::size_t k = ref.num_classes();

  // Accumulate in entry order per voxel; flips are involutions so the same
  // flip undoes them.
  std::vector<std::vector<double>> acc(k, std::vector<double>(n, 0.0));
  for (const auto& [spec, p] : probs) {
    for (std::size_t c = 0; c < k; ++c) {
      const Image aligned = apply_flip(p.channel(c), spec);
      const auto a = aligned.data();
      auto& dst = acc[c];
      const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < nn; ++i) dst[i] += a[i];
    }
  }

  std::vector<Image> channels(k, Image(ref.dims(), ref.spacing()));
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < nn; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += acc[c][i];
    for (std::size_t c = 0; c < k; ++c) {
      channels[c][i] = sum > 0.0 ? static_cast<float>(acc[c][i] / sum)
                                 : static_cast<float>(1.0 / static_cast<double>(k));
    }
  }
  return ProbMap(ref.classes(), std::move(channels));
}

LabelMap argmax_labels(const ProbMap& prob) {
  LabelMap out(prob.dims(), prob.spacing());
  const std::size_t n = out.size();
  const auto& classes = prob.classes();
  auto o = out.data();
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < nn; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    std::size_t best = 0;
    float best_p = prob.channel(0)[i];
    for (std::size_t c = 1; c < classes.size(); ++c) {
      const float p = prob.channel(c)[i];
      if (p > best_p) {
        best = c;
        best_p = p;
      }
    }
    // Unlisted classes sit at probability 0, and background is the lowest.
    o[i] = best_p <= 0.0f ? kBackground : classes[best];
  }
  return out;
}

}  // namespace ssl3d
