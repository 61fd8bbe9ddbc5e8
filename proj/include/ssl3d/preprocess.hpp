#pragma once

#include <span>

#include "ssl3d/volume.hpp"

namespace ssl3d {

/// HU clipping window and z-normalization statistics. Defaults are the
/// abdominal CT foreground statistics used by the reference training setup.
struct NormalizationParams {
  double clip_lo = -970.0;
  double clip_hi = 279.0;
  double mean = 80.3;
  double std = 141.4;

  void validate() const;
};

enum class InterpMode { trilinear, linear, nearest };

struct ResampleSpec {
  Spacing target;
  InterpMode in_plane_mode = InterpMode::trilinear;
  InterpMode through_plane_mode = InterpMode::linear;
  InterpMode label_mode = InterpMode::nearest;
};

/// (clamp(x, lo, hi) - mean) / std, voxelwise.
Image clip_normalize(const Image& vol, const NormalizationParams& params);

/// Output dims: round(n * old / target), at least 1 per axis.
Dims resampled_dims(const Dims& dims, const Spacing& from, const Spacing& to);

Image resample_image(const Image& vol, const ResampleSpec& spec);
LabelMap resample_labels(const LabelMap& map, const ResampleSpec& spec);

// Resampling onto an explicit grid; used to map predictions made on a
// resampled grid back onto the native one.
Image resample_image_to(const Image& vol, const Dims& dims, const Spacing& spacing);
LabelMap resample_labels_to(const LabelMap& map, const Dims& dims, const Spacing& spacing);

/// Per-axis median; the lower median for even counts.
Spacing median_spacing(std::span<const Spacing> spacings);

}  // namespace ssl3d
