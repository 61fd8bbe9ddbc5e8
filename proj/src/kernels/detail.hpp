#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ssl3d/taxonomy.hpp"

namespace ssl3d::kernels::detail {

inline double source_coord(std::size_t i, double scale, std::size_t n_in) {
  const double c = (static_cast<double>(i) + 0.5) * scale - 0.5;
  return std::clamp(c, 0.0, static_cast<double>(n_in - 1));
}

struct LinearTap {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

inline LinearTap linear_tap(std::size_t i, double scale, std::size_t n_in) {
  const double c = source_coord(i, scale, n_in);
  const auto lo = static_cast<std::size_t>(std::floor(c));
  const auto hi = std::min(lo + 1, n_in - 1);
  return {lo, hi, c - static_cast<double>(lo)};
}

inline std::size_t nearest_tap(std::size_t i, double scale, std::size_t n_in) {
  const double c = source_coord(i, scale, n_in);
  return std::min(static_cast<std::size_t>(std::floor(c + 0.5)), n_in - 1);
}

inline float normalize_one(float x, double lo, double hi, double mean, double stddev) {
  const double c = std::clamp(static_cast<double>(x), lo, hi);
  return static_cast<float>((c - mean) / stddev);
}

// Lower envelope of parabolas along one line: out[q] = min_p (w(q-p))^2 + f[p].
// Infinite entries carry no parabola. `v` and `z` are scratch of size n, n+1.
inline void edt_line(std::span<const double> f, double w, std::span<double> out,
                     std::vector<std::size_t>& v, std::vector<double>& z) {
  const std::size_t n = f.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  v.resize(n);
  z.resize(n + 1);
  std::size_t k = 0;
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    const double pq = w * static_cast<double>(q);
    if (!any) {
      v[0] = q;
      z[0] = -inf;
      z[1] = inf;
      any = true;
      continue;
    }
    // z[0] is -inf, so the pop loop always stops at k == 0.
    double s = 0.0;
    while (true) {
      const double pv = w * static_cast<double>(v[k]);
      s = ((f[q] + pq * pq) - (f[v[k]] + pv * pv)) / (2.0 * (pq - pv));
      if (s > z[k]) break;
      --k;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  if (!any) {
    std::fill(out.begin(), out.end(), inf);
    return;
  }
  std::size_t j = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double pq = w * static_cast<double>(q);
    while (z[j + 1] < pq) ++j;
    const double d = w * (static_cast<double>(q) - static_cast<double>(v[j]));
    out[q] = d * d + f[v[j]];
  }
}

inline std::uint8_t vote_one(std::span<const std::span<const std::uint8_t>> votes, std::size_t i,
                             std::size_t min_votes) {
  std::array<std::uint16_t, kNumClasses> tally{};
  for (const auto& src : votes) ++tally[src[i]];
  const auto best = *std::max_element(tally.begin(), tally.end());
  if (min_votes != 0 && best < min_votes) return kBackground;
  for (const auto& src : votes) {
    if (tally[src[i]] == best) return src[i];
  }
  return kBackground;
}

}  // namespace ssl3d::kernels::detail
