#include <limits>

#include "detail.hpp"
#include "ssl3d/kernels.hpp"

namespace ssl3d::kernels::reference {

void clip_normalize(std::span<const float> in, std::span<float> out, const NormalizeArgs& a) {
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = detail::normalize_one(in[i], a.clip_lo, a.clip_hi, a.mean, a.stddev);
  }
}

std::vector<float> resample_linear(std::span<const float> in, const ResampleGeometry& g) {
  std::vector<float> out(g.out.count());
  for (std::size_t z = 0; z < g.out.nz; ++z) {
    const auto tz = detail::linear_tap(z, g.scale[2], g.in.nz);
    for (std::size_t y = 0; y < g.out.ny; ++y) {
      const auto ty = detail::linear_tap(y, g.scale[1], g.in.ny);
      for (std::size_t x = 0; x < g.out.nx; ++x) {
        const auto tx = detail::linear_tap(x, g.scale[0], g.in.nx);
        double acc = 0.0;
        for (int cz = 0; cz < 2; ++cz) {
          const double wz = cz ? tz.frac : 1.0 - tz.frac;
          const std::size_t iz = cz ? tz.hi : tz.lo;
          for (int cy = 0; cy < 2; ++cy) {
            const double wy = cy ? ty.frac : 1.0 - ty.frac;
            const std::size_t iy = cy ? ty.hi : ty.lo;
            for (int cx = 0; cx < 2; ++cx) {
              const double wx = cx ? tx.frac : 1.0 - tx.frac;
              const std::size_t ix = cx ? tx.hi : tx.lo;
              const double w = wx * wy * wz;
              if (w != 0.0) acc += w * static_cast<double>(in[g.in.index(ix, iy, iz)]);
            }
          }
        }
        out[g.out.index(x, y, z)] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

std::vector<std::uint8_t> resample_nearest(std::span<const std::uint8_t> in, const ResampleGeometry& g) {
  std::vector<std::uint8_t> out(g.out.count());
  for (std::size_t z = 0; z < g.out.nz; ++z) {
    const auto iz = detail::nearest_tap(z, g.scale[2], g.in.nz);
    for (std::size_t y = 0; y < g.out.ny; ++y) {
      const auto iy = detail::nearest_tap(y, g.scale[1], g.in.ny);
      for (std::size_t x = 0; x < g.out.nx; ++x) {
        const auto ix = detail::nearest_tap(x, g.scale[0], g.in.nx);
        out[g.out.index(x, y, z)] = in[g.in.index(ix, iy, iz)];
      }
    }
  }
  return out;
}

std::vector<double> edt_squared(std::span<const std::uint8_t> mask, Dims d, Spacing sp) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) dist[i] = mask[i] ? 0.0 : inf;

  std::vector<std::size_t> v;
  std::vector<double> z;
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t n = d[axis];
    const std::size_t stride = axis == 0 ? 1 : (axis == 1 ? d.nx : d.nx * d.ny);
    std::vector<double> line(n);
    std::vector<double> res(n);
    // Enumerate every line along `axis` by its first voxel.
    for (std::size_t base = 0; base < dist.size(); ++base) {
      const std::size_t coord = (base / stride) % n;
      if (coord != 0) continue;
      for (std::size_t i = 0; i < n; ++i) line[i] = dist[base + i * stride];
      detail::edt_line(line, sp[axis], res, v, z);
      for (std::size_t i = 0; i < n; ++i) dist[base + i * stride] = res[i];
    }
  }
  return dist;
}

void majority_vote(std::span<const std::span<const std::uint8_t>> votes, std::size_t min_votes,
                   std::span<std::uint8_t> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = detail::vote_one(votes, i, min_votes);
}

}  // namespace ssl3d::kernels::reference
