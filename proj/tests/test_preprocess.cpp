#include <doctest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "ssl3d/preprocess.hpp"

using namespace ssl3d;

namespace {

Image one_voxel(float v) { return Image(Dims{1, 1, 1}, Spacing{}, v); }

float normalized(float v) { return clip_normalize(one_voxel(v), NormalizationParams{})[0]; }

}  // namespace

TEST_SUITE("preprocess") {
  TEST_CASE("default constants") {
    const NormalizationParams p;
    CHECK(p.clip_lo == -970.0);
    CHECK(p.clip_hi == 279.0);
    CHECK(p.mean == 80.3);
    CHECK(p.std == 141.4);
  }

  TEST_CASE("clip_normalize hand values") {
    CHECK(std::abs(normalized(80.3f)) < 1e-6);
    CHECK(std::abs(normalized(-2000.0f) - (-970.0 - 80.3) / 141.4) < 1e-6);
    CHECK(std::abs(normalized(279.0f) - (279.0 - 80.3) / 141.4) < 1e-6);
    CHECK(std::abs(normalized(-2000.0f) - -7.427864) < 1e-6);
    CHECK(std::abs(normalized(279.0f) - 1.405233) < 1e-6);
  }

  TEST_CASE("clip_normalize range and monotonicity") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<float> u(-5000.0f, 5000.0f);
    Image img(Dims{40, 30, 5}, Spacing{});
    for (auto& v : img.data()) v = u(rng);
    const auto out = clip_normalize(img, {});
    const double lo = (-970.0 - 80.3) / 141.4, hi = (279.0 - 80.3) / 141.4;
    std::vector<std::pair<float, float>> pairs;
    for (std::size_t i = 0; i < img.size(); ++i) {
      CHECK(out[i] >= lo - 1e-6);
      CHECK(out[i] <= hi + 1e-6);
      pairs.emplace_back(img[i], out[i]);
    }
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t i = 1; i < pairs.size(); ++i) CHECK(pairs[i - 1].second <= pairs[i].second);
    CHECK(out.dims() == img.dims());
  }

  TEST_CASE("invalid normalization parameters") {
    NormalizationParams p;
    p.std = 0;
    CHECK_THROWS_AS(clip_normalize(one_voxel(0), p), InvalidArgument);
    p = {};
    p.clip_lo = 300;
    CHECK_THROWS_AS(clip_normalize(one_voxel(0), p), InvalidArgument);
  }

  TEST_CASE("resampled dims") {
    CHECK(resampled_dims(Dims{10, 10, 5}, Spacing{1, 1, 3}, Spacing{2, 2, 1}) == Dims{5, 5, 15});
    CHECK(resampled_dims(Dims{3, 3, 3}, Spacing{1, 1, 1}, Spacing{10, 10, 10}) == Dims{1, 1, 1});
    CHECK_THROWS_AS(resampled_dims(Dims{3, 3, 3}, Spacing{1, 1, 1}, Spacing{0, 1, 1}), InvalidArgument);
  }

  TEST_CASE("constant volumes stay constant") {
    const Image img(Dims{7, 5, 4}, Spacing{0.7, 0.8, 3.0}, 7.0f);
    const auto out = resample_image(img, ResampleSpec{.target = Spacing{1.1, 0.5, 1.3}});
    for (float v : out.values()) CHECK(v == doctest::Approx(7.0f));
  }

  TEST_CASE("ramp matches direct interpolation formula") {
    Image img(Dims{6, 2, 2}, Spacing{2, 1, 1});
    for (std::size_t z = 0; z < 2; ++z)
      for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 6; ++x) img.at(x, y, z) = float(x);
    const auto out = resample_image(img, ResampleSpec{.target = Spacing{1, 1, 1}});
    REQUIRE(out.dims() == Dims{12, 2, 2});
    const std::vector<double> f{0, 1, 2, 3, 4, 5};
    for (std::size_t x = 0; x < 12; ++x) {
      CHECK(out.at(x, 1, 1) == doctest::Approx(oracle::linear_1d(f, x, 0.5)).epsilon(1e-6));
    }
    // Interior slope 0.5 per output voxel.
    for (std::size_t x = 2; x < 10; ++x) CHECK(out.at(x + 1, 0, 0) - out.at(x, 0, 0) == doctest::Approx(0.5));
  }

  TEST_CASE("separable resampling matches the per-axis formula in 3D") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<float> u(-100, 100);
    const Dims d{5, 4, 3};
    Image img(d, Spacing{1.0, 1.5, 2.5});
    for (auto& v : img.data()) v = u(rng);
    const Spacing target{0.6, 1.1, 1.7};
    const auto out = resample_image(img, ResampleSpec{.target = target});
    const double sx = 0.6 / 1.0, sy = 1.1 / 1.5, sz = 1.7 / 2.5;
    const Dims od = out.dims();
    for (std::size_t z = 0; z < od.nz; ++z)
      for (std::size_t y = 0; y < od.ny; ++y)
        for (std::size_t x = 0; x < od.nx; ++x) {
          // Interpolate along x for every (y, z), then y, then z.
          std::vector<double> along_z;
          for (std::size_t iz = 0; iz < d.nz; ++iz) {
            std::vector<double> along_y;
            for (std::size_t iy = 0; iy < d.ny; ++iy) {
              std::vector<double> row;
              for (std::size_t ix = 0; ix < d.nx; ++ix) row.push_back(img.at(ix, iy, iz));
              along_y.push_back(oracle::linear_1d(row, x, sx));
            }
            along_z.push_back(oracle::linear_1d(along_y, y, sy));
          }
          CHECK(out.at(x, y, z) == doctest::Approx(oracle::linear_1d(along_z, z, sz)).epsilon(1e-5));
        }
  }

  TEST_CASE("identity spacing is exact") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<float> u(-1000, 1000);
    Image img(Dims{6, 5, 4}, Spacing{0.8, 0.8, 2.5});
    for (auto& v : img.data()) v = u(rng);
    const auto out = resample_image(img, ResampleSpec{.target = img.spacing()});
    CHECK(out == img);
    LabelMap lab(img.dims(), img.spacing());
    for (std::size_t i = 0; i < lab.size(); ++i) lab[i] = std::uint8_t(i % 15);
    CHECK(resample_labels(lab, ResampleSpec{.target = lab.spacing()}) == lab);
  }

  TEST_CASE("interpolation stays within the input range") {
    std::mt19937 rng(6);
    std::uniform_real_distribution<float> u(-50, 80);
    Image img(Dims{6, 7, 5}, Spacing{1, 1, 3});
    for (auto& v : img.data()) v = u(rng);
    const auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
    const auto out = resample_image(img, ResampleSpec{.target = Spacing{0.7, 1.3, 1.1}});
    for (float v : out.values()) {
      CHECK(v >= *lo);
      CHECK(v <= *hi);
    }
  }

  TEST_CASE("label upsampling of a single voxel gives a block") {
    LabelMap m(Dims{3, 3, 3}, Spacing{2, 2, 2});
    m.at(1, 1, 1) = 5;
    const auto out = resample_labels(m, ResampleSpec{.target = Spacing{1, 1, 1}});
    REQUIRE(out.dims() == Dims{6, 6, 6});
    std::size_t fives = 0;
    for (std::size_t z = 0; z < 6; ++z)
      for (std::size_t y = 0; y < 6; ++y)
        for (std::size_t x = 0; x < 6; ++x) {
          const auto v = out.at(x, y, z);
          CHECK((v == 0 || v == 5));
          const bool inside = x >= 2 && x <= 3 && y >= 2 && y <= 3 && z >= 2 && z <= 3;
          CHECK((v == 5) == inside);
          fives += v == 5;
        }
    CHECK(fives == 8);
  }

  TEST_CASE("label resampling never invents classes") {
    std::mt19937 rng(8);
    std::bernoulli_distribution b(0.3);
    LabelMap m(Dims{7, 6, 5}, Spacing{0.9, 0.9, 2.0});
    for (auto& v : m.data()) v = b(rng) ? 14 : 0;
    for (const Spacing t : {Spacing{0.5, 0.5, 0.5}, Spacing{2, 2, 4}, Spacing{1.3, 0.4, 2.2}}) {
      const auto out = resample_labels(m, ResampleSpec{.target = t});
      for (auto v : out.values()) CHECK((v == 0 || v == 14));
    }
  }

  TEST_CASE("resampling needs two voxels per axis") {
    CHECK_THROWS_AS(resample_image(Image(Dims{1, 4, 4}, Spacing{}), ResampleSpec{.target = Spacing{}}),
                    InvalidArgument);
  }

  TEST_CASE("resampling back onto a grid") {
    Image img(Dims{4, 4, 4}, Spacing{}, 3.0f);
    const auto out = resample_image_to(img, Dims{8, 2, 4}, Spacing{0.5, 2, 1});
    CHECK(out.dims() == Dims{8, 2, 4});
    for (float v : out.values()) CHECK(v == doctest::Approx(3.0f));
  }

  TEST_CASE("median spacing") {
    const std::vector<Spacing> one{{1, 1, 3}};
    CHECK(median_spacing(one) == Spacing{1, 1, 3});
    const std::vector<Spacing> three{{1, 1, 1}, {1, 1, 2}, {1, 1, 5}};
    CHECK(median_spacing(three).dz == 2);
    const std::vector<Spacing> two{{1, 1, 1}, {1, 1, 4}};
    CHECK(median_spacing(two).dz == 1);
    CHECK_THROWS_AS(median_spacing(std::span<const Spacing>{}), InvalidArgument);
  }
}
