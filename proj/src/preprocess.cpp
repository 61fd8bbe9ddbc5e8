#include "ssl3d/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ssl3d/kernels.hpp"

namespace ssl3d {

void NormalizationParams::validate() const {
  if (!(std::isfinite(clip_lo) && std::isfinite(clip_hi) && std::isfinite(mean) &&
        std::isfinite(std))) {
    throw InvalidArgument("normalization parameters must be finite");
  }
  if (!(clip_lo < clip_hi)) throw InvalidArgument("normalization requires clip_lo < clip_hi");
  if (!(std > 0)) throw InvalidArgument("normalization std must be positive");
}

Image clip_normalize(const Image& vol, const NormalizationParams& params) {
  params.validate();
  Image out(vol.dims(), vol.spacing());
  const kernels::NormalizeArgs args{params.clip_lo, params.clip_hi, params.mean, params.std};
  kernels::parallel::clip_normalize(vol.data(), out.data(), args);
  return out;
}

Dims resampled_dims(const Dims& dims, const Spacing& from, const Spacing& to) {
  from.validate();
  to.validate();
  auto axis = [&](int a) {
    const double n = std::round(static_cast<double>(dims[a]) * from[a] / to[a]);
    return static_cast<std::size_t>(std::max(1.0, n));
  };
  return Dims{axis(0), axis(1), axis(2)};
}

namespace {

kernels::ResampleGeometry spacing_geometry(const Dims& in, const Spacing& from, const Spacing& to) {
  return {in, resampled_dims(in, from, to), {to.dx / from.dx, to.dy / from.dy, to.dz / from.dz}};
}

kernels::ResampleGeometry grid_geometry(const Dims& in, const Dims& out) {
  auto ratio = [&](int a) { return static_cast<double>(in[a]) / static_cast<double>(out[a]); };
  return {in, out, {ratio(0), ratio(1), ratio(2)}};
}

void require_resample_input(const Dims& d) {
  if (d.nx < 2 || d.ny < 2 || d.nz < 2) {
    throw InvalidArgument("resampling needs at least 2 voxels per axis, got " + to_string(d));
  }
}

}  // namespace

Image resample_image(const Image& vol, const ResampleSpec& spec) {
  spec.target.validate();
  require_resample_input(vol.dims());
  const auto g = spacing_geometry(vol.dims(), vol.spacing(), spec.target);
  return Image(g.out, spec.target, kernels::parallel::resample_linear(vol.data(), g));
}

LabelMap resample_labels(const LabelMap& map, const ResampleSpec& spec) {
  spec.target.validate();
  require_resample_input(map.dims());
  const auto g = spacing_geometry(map.dims(), map.spacing(), spec.target);
  return LabelMap(g.out, spec.target, kernels::parallel::resample_nearest(map.data(), g));
}

Image resample_image_to(const Image& vol, const Dims& dims, const Spacing& spacing) {
  if (vol.dims() == dims) return Image(dims, spacing, vol.values());
  const auto g = grid_geometry(vol.dims(), dims);
  return Image(dims, spacing, kernels::parallel::resample_linear(vol.data(), g));
}

LabelMap resample_labels_to(const LabelMap& map, const Dims& dims, const Spacing& spacing) {
  if (map.dims() == dims) return LabelMap(dims, spacing, map.values());
  const auto g = grid_geometry(map.dims(), dims);
  return LabelMap(dims, spacing, kernels::parallel::resample_nearest(map.data(), g));
}

Spacing median_spacing(std::span<const Spacing> spacings) {
  if (spacings.empty()) throw InvalidArgument("median spacing of an empty case list");
  auto lower_median = [&](int a) {
    std::vector<double> v;
    v.reserve(spacings.size());
    for (const auto& s : spacings) v.push_back(s[a]);
    std::sort(v.begin(), v.end());
    return v[(v.size() - 1) / 2];
  };
  return Spacing{lower_median(0), lower_median(1), lower_median(2)};
}

}  // namespace ssl3d
