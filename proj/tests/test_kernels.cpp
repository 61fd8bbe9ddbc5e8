#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ssl3d/kernels.hpp"

using namespace ssl3d;
namespace ref = ssl3d::kernels::reference;
namespace par = ssl3d::kernels::parallel;

namespace {

kernels::ResampleGeometry geometry(const Dims& in, const Dims& out) {
  return {in, out,
          {double(in.nx) / double(out.nx), double(in.ny) / double(out.ny), double(in.nz) / double(out.nz)}};
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("clip_normalize agrees bit-exactly") {
    std::mt19937 rng(1);
    std::uniform_real_distribution<float> u(-3000.0f, 3000.0f);
    std::vector<float> in(5000);
    for (auto& v : in) v = u(rng);
    std::vector<float> a(in.size()), b(in.size());
    const kernels::NormalizeArgs args{-970.0, 279.0, 80.3, 141.4};
    ref::clip_normalize(in, a, args);
    par::clip_normalize(in, b, args);
    CHECK(a == b);
  }

  TEST_CASE("resampling agrees") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<float> u(-100.0f, 100.0f);
    std::uniform_int_distribution<std::size_t> n(2, 9);
    for (int trial = 0; trial < 30; ++trial) {
      const Dims in{n(rng), n(rng), n(rng)};
      const Dims out{n(rng), n(rng), n(rng)};
      std::vector<float> img(in.count());
      for (auto& v : img) v = u(rng);
      const auto g = geometry(in, out);
      const auto a = ref::resample_linear(img, g);
      const auto b = par::resample_linear(img, g);
      REQUIRE(a.size() == out.count());
      REQUIRE(b.size() == out.count());
      for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-5).scale(100));

      std::vector<std::uint8_t> labels(in.count());
      for (auto& v : labels) v = std::uint8_t(rng() % 15);
      CHECK(ref::resample_nearest(labels, g) == par::resample_nearest(labels, g));
    }
  }

  TEST_CASE("edt agrees bit-exactly") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
      const Dims d{std::size_t(2 + trial % 7), std::size_t(3 + trial % 5), std::size_t(1 + trial % 4)};
      const auto sp = oracle::random_spacing(rng);
      const auto m = oracle::random_mask(rng, d.count(), trial % 10 == 0 ? 0.0 : 0.2);
      CHECK(ref::edt_squared(m, d, sp) == par::edt_squared(m, d, sp));
    }
  }

  TEST_CASE("majority vote agrees bit-exactly") {
    std::mt19937 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
      const std::size_t n = 500, k = 1 + std::size_t(trial) % 5;
      std::vector<std::vector<std::uint8_t>> maps(k, std::vector<std::uint8_t>(n));
      for (auto& m : maps)
        for (auto& v : m) v = std::uint8_t(rng() % 4);
      std::vector<std::span<const std::uint8_t>> spans(maps.begin(), maps.end());
      const std::size_t min_votes = std::size_t(trial) % 3;
      std::vector<std::uint8_t> a(n), b(n);
      ref::majority_vote(spans, min_votes, a);
      par::majority_vote(spans, min_votes, b);
      CHECK(a == b);
      CHECK(a == oracle::vote(maps, min_votes));
    }
  }
}
