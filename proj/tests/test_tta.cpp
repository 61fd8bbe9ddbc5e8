#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ssl3d/tta.hpp"

using namespace ssl3d;

namespace {

ProbMap random_prob(std::mt19937& rng, const Dims& d, std::vector<std::uint8_t> classes) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  std::vector<Image> ch(classes.size(), Image(d, Spacing{0.8, 0.8, 2.5}));
  for (std::size_t i = 0; i < d.count(); ++i) {
    std::vector<double> raw(classes.size());
    double sum = 0;
    for (auto& r : raw) sum += (r = u(rng));
    for (std::size_t c = 0; c < classes.size(); ++c) ch[c][i] = float(raw[c] / sum);
  }
  return ProbMap(std::move(classes), std::move(ch));
}

double max_diff(const ProbMap& a, const ProbMap& b) {
  double m = 0;
  for (std::size_t c = 0; c < a.num_classes(); ++c)
    for (std::size_t i = 0; i < a.channel(c).size(); ++i)
      m = std::max(m, double(std::abs(a.channel(c)[i] - b.channel(c)[i])));
  return m;
}

ProbMap constant_prob(const Dims& d, float p1) {
  return ProbMap({0, 1}, {Image(d, Spacing{}, 1.0f - p1), Image(d, Spacing{}, p1)});
}

}  // namespace

TEST_SUITE("tta") {
  TEST_CASE("flip enumeration order") {
    const auto f = enumerate_flips();
    REQUIRE(f.size() == 8);
    CHECK(f[0].identity());
    CHECK(f[1] == FlipSpec{false, false, true});
    CHECK(f[2] == FlipSpec{false, true, false});
    CHECK(f[4] == FlipSpec{true, false, false});
    CHECK(f[7] == FlipSpec{true, true, true});
    CHECK(to_string(f[0]) == "none");
    CHECK(to_string(f[5]) == "xz");
  }

  TEST_CASE("apply_flip") {
    Image ab(Dims{2, 1, 1}, Spacing{}, std::vector<float>{1.0f, 2.0f});
    CHECK(apply_flip(ab, FlipSpec{true, false, false}).values() == std::vector<float>{2.0f, 1.0f});
    std::mt19937 rng(2);
    std::uniform_real_distribution<float> u(-1, 1);
    Image img(Dims{4, 3, 5}, Spacing{0.5, 1, 2});
    for (auto& v : img.data()) v = u(rng);
    CHECK(apply_flip(img, FlipSpec{}) == img);
    for (const auto& f : enumerate_flips()) {
      const auto once = apply_flip(img, f);
      CHECK(once.spacing() == img.spacing());
      CHECK(apply_flip(once, f) == img);
    }
    const auto z = apply_flip(img, FlipSpec{false, false, true});
    CHECK(z.at(1, 2, 0) == img.at(1, 2, 4));
  }

  TEST_CASE("aggregate of one identity entry is the input") {
    std::mt19937 rng(3);
    const auto p = random_prob(rng, Dims{3, 4, 2}, {0, 1, 14});
    const auto out = aggregate({{FlipSpec{}, p}});
    CHECK(max_diff(out, p) < 1e-6);
    CHECK(argmax_labels(out) == argmax_labels(p));
  }

  TEST_CASE("flipped copies of one map reconstruct it") {
    std::mt19937 rng(4);
    const auto base = random_prob(rng, Dims{5, 4, 3}, {0, 2, 5});
    std::vector<std::pair<FlipSpec, ProbMap>> entries;
    for (const auto& f : enumerate_flips()) entries.emplace_back(f, apply_flip(base, f));
    const auto out = aggregate(entries);
    CHECK(max_diff(out, base) < 1e-6);
    out.validate(1e-6);
  }

  TEST_CASE("mean of constant maps") {
    const Dims d{2, 2, 2};
    const auto out = aggregate({{FlipSpec{}, constant_prob(d, 0.6f)}, {FlipSpec{true, false, false}, constant_prob(d, 0.8f)}});
    for (float v : out.channel(1).values()) CHECK(v == doctest::Approx(0.7));
  }

  TEST_CASE("aggregate is insensitive to entry order") {
    std::mt19937 rng(5);
    std::vector<std::pair<FlipSpec, ProbMap>> entries;
    for (const auto& f : enumerate_flips()) entries.emplace_back(f, random_prob(rng, Dims{4, 4, 3}, {0, 1}));
    const auto a = aggregate(entries);
    std::reverse(entries.begin(), entries.end());
    CHECK(max_diff(a, aggregate(entries)) < 1e-6);
  }

  TEST_CASE("symmetric input through a fixed model") {
    // A pointwise model is flip-equivariant, so averaging over flips of a
    // mirror-symmetric input gives the model output on the input.
    const Dims d{4, 4, 4};
    Image img(d, Spacing{});
    for (std::size_t z = 0; z < 4; ++z)
      for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 4; ++x) {
          const auto dist = [](std::size_t i) { return std::abs(double(i) - 1.5); };
          img.at(x, y, z) = float(dist(x) + dist(y) + dist(z));
        }
    const auto model = [&](const Image& in) {
      Image p1(in.dims(), in.spacing());
      for (std::size_t i = 0; i < in.size(); ++i) p1[i] = float(1.0 / (1.0 + std::exp(in[i] - 2.5)));
      Image p0(in.dims(), in.spacing());
      for (std::size_t i = 0; i < in.size(); ++i) p0[i] = 1.0f - p1[i];
      return ProbMap({0, 1}, {p0, p1});
    };
    std::vector<std::pair<FlipSpec, ProbMap>> entries;
    for (const auto& f : enumerate_flips()) entries.emplace_back(f, model(apply_flip(img, f)));
    CHECK(max_diff(aggregate(entries), model(img)) < 1e-6);
  }

  TEST_CASE("aggregate errors") {
    CHECK_THROWS_AS(aggregate({}), InvalidArgument);
    CHECK_THROWS_AS(aggregate({{FlipSpec{}, constant_prob(Dims{2, 2, 2}, 0.5f)},
                               {FlipSpec{}, constant_prob(Dims{2, 2, 1}, 0.5f)}}),
                    ShapeMismatch);
    const auto other = ProbMap({0, 2}, {Image(Dims{2, 2, 2}, Spacing{}), Image(Dims{2, 2, 2}, Spacing{})});
    CHECK_THROWS_AS(aggregate({{FlipSpec{}, constant_prob(Dims{2, 2, 2}, 0.5f)}, {FlipSpec{}, other}}),
                    ShapeMismatch);
  }

  TEST_CASE("argmax") {
    const Dims d{1, 1, 1};
    CHECK(argmax_labels(ProbMap({0, 1}, {Image(d, {}, 0.1f), Image(d, {}, 0.9f)}))[0] == 1);
    CHECK(argmax_labels(ProbMap({0, 1}, {Image(d, {}, 0.5f), Image(d, {}, 0.5f)}))[0] == 0);
    CHECK(argmax_labels(ProbMap({3, 14}, {Image(d, {}, 0.5f), Image(d, {}, 0.5f)}))[0] == 3);
    // One-hot maps recover the hot class.
    std::vector<Image> ch(3, Image(Dims{3, 1, 1}, Spacing{}));
    ch[0][0] = 1;
    ch[1][1] = 1;
    ch[2][2] = 1;
    CHECK(argmax_labels(ProbMap({0, 4, 9}, ch)).values() == std::vector<std::uint8_t>{0, 4, 9});
  }

  TEST_CASE("prob map validation") {
    const Dims d{1, 1, 1};
    CHECK_THROWS_AS(ProbMap({1, 0}, {Image(d, {}), Image(d, {})}), InvalidArgument);
    CHECK_THROWS_AS(ProbMap({0}, {Image(d, {}), Image(d, {})}), InvalidArgument);
    CHECK_THROWS_AS(ProbMap({0, 1}, {Image(d, {}, 0.3f), Image(d, {}, 0.3f)}).validate(), InvalidArgument);
    CHECK_THROWS_AS(ProbMap({0, 1}, {Image(d, {}, 1.5f), Image(d, {}, -0.5f)}).validate(), InvalidArgument);
    CHECK_NOTHROW(ProbMap({0, 1}, {Image(d, {}, 0.25f), Image(d, {}, 0.75f)}).validate());
  }
}
