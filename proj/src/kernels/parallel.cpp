#include <limits>

#include "detail.hpp"
#include "ssl3d/kernels.hpp"

namespace ssl3d::kernels::parallel {

using Index = std::ptrdiff_t;

void clip_normalize(std::span<const float> in, std::span<float> out, const NormalizeArgs& a) {
  const auto n = static_cast<Index>(in.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    out[i] = detail::normalize_one(in[i], a.clip_lo, a.clip_hi, a.mean, a.stddev);
  }
}

namespace {

// One linear pass along `axis`, changing that axis' extent from src_dims to
// the output extent.
std::vector<float> linear_pass(const std::vector<float>& src, Dims src_dims, int axis,
                               std::size_t n_out, double scale) {
  Dims dst_dims = src_dims;
  (axis == 0 ? dst_dims.nx : axis == 1 ? dst_dims.ny : dst_dims.nz) = n_out;
  const std::size_t n_in = src_dims[axis];
  std::vector<detail::LinearTap> taps(n_out);
  for (std::size_t i = 0; i < n_out; ++i) taps[i] = detail::linear_tap(i, scale, n_in);

  std::vector<float> dst(dst_dims.count());
  const auto nz = static_cast<Index>(dst_dims.nz);
#pragma omp parallel for schedule(static)
  for (Index zi = 0; zi < nz; ++zi) {
    const auto z = static_cast<std::size_t>(zi);
    for (std::size_t y = 0; y < dst_dims.ny; ++y) {
      for (std::size_t x = 0; x < dst_dims.nx; ++x) {
        std::size_t lo = 0;
        std::size_t hi = 0;
        double f = 0.0;
        if (axis == 0) {
          const auto& t = taps[x];
          lo = src_dims.index(t.lo, y, z);
          hi = src_dims.index(t.hi, y, z);
          f = t.frac;
        } else if (axis == 1) {
          const auto& t = taps[y];
          lo = src_dims.index(x, t.lo, z);
          hi = src_dims.index(x, t.hi, z);
          f = t.frac;
        } else {
          const auto& t = taps[z];
          lo = src_dims.index(x, y, t.lo);
          hi = src_dims.index(x, y, t.hi);
          f = t.frac;
        }
        const double a = src[lo];
        const double b = src[hi];
        dst[dst_dims.index(x, y, z)] = static_cast<float>(f == 0.0 ? a : (1.0 - f) * a + f * b);
      }
    }
  }
  return dst;
}

}  // namespace

// Separable: bilinear in the (x, y) plane, then linear along z.
std::vector<float> resample_linear(std::span<const float> in, const ResampleGeometry& g) {
  std::vector<float> cur(in.begin(), in.end());
  Dims dims = g.in;
  for (int axis = 0; axis < 3; ++axis) {
    cur = linear_pass(cur, dims, axis, g.out[axis], g.scale[axis]);
    (axis == 0 ? dims.nx : axis == 1 ? dims.ny : dims.nz) = g.out[axis];
  }
  return cur;
}

std::vector<std::uint8_t> resample_nearest(std::span<const std::uint8_t> in, const ResampleGeometry& g) {
  std::vector<std::size_t> mx(g.out.nx), my(g.out.ny), mz(g.out.nz);
  for (std::size_t i = 0; i < g.out.nx; ++i) mx[i] = detail::nearest_tap(i, g.scale[0], g.in.nx);
  for (std::size_t i = 0; i < g.out.ny; ++i) my[i] = detail::nearest_tap(i, g.scale[1], g.in.ny);
  for (std::size_t i = 0; i < g.out.nz; ++i) mz[i] = detail::nearest_tap(i, g.scale[2], g.in.nz);
  std::vector<std::uint8_t> out(g.out.count());
  const auto nz = static_cast<Index>(g.out.nz);
#pragma omp parallel for schedule(static)
  for (Index zi = 0; zi < nz; ++zi) {
    const auto z = static_cast<std::size_t>(zi);
    for (std::size_t y = 0; y < g.out.ny; ++y) {
      for (std::size_t x = 0; x < g.out.nx; ++x) {
        out[g.out.index(x, y, z)] = in[g.in.index(mx[x], my[y], mz[z])];
      }
    }
  }
  return out;
}

std::vector<double> edt_squared(std::span<const std::uint8_t> mask, Dims d, Spacing sp) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(mask.size());
  const auto total = static_cast<Index>(mask.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < total; ++i) dist[i] = mask[i] ? 0.0 : inf;

  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t n = d[axis];
    const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? d.nx : d.nx * d.ny);
    // Lines along `axis` are indexed by the two remaining coordinates.
    const std::size_t a_n = axis == 0 ? d.ny : d.nx;
    const std::size_t b_n = axis == 2 ? d.ny : d.nz;
    const auto lines = static_cast<Index>(a_n * b_n);
#pragma omp parallel
    {
      std::vector<double> line(n);
      std::vector<double> res(n);
      std::vector<std::size_t> v;
      std::vector<double> z;
#pragma omp for schedule(static)
      for (Index li = 0; li < lines; ++li) {
        const std::size_t a = static_cast<std::size_t>(li) % a_n;
        const std::size_t b = static_cast<std::size_t>(li) / a_n;
        std::size_t base = 0;
        if (axis == 0) base = d.index(0, a, b);
        else if (axis == 1) base = d.index(a, 0, b);
        else base = d.index(a, b, 0);
        for (std::size_t i = 0; i < n; ++i) line[i] = dist[base + i * stride];
        detail::edt_line(line, sp[axis], res, v, z);
        for (std::size_t i = 0; i < n; ++i) dist[base + i * stride] = res[i];
      }
    }
  }
  return dist;
}

void majority_vote(std::span<const std::span<const std::uint8_t>> votes, std::size_t min_votes,
                   std::span<std::uint8_t> out) {
  const auto n = static_cast<Index>(out.size());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < n; ++i) {
    out[i] = detail::vote_one(votes, static_cast<std::size_t>(i), min_votes);
  }
}

}  // namespace ssl3d::kernels::parallel
