#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ssl3d/error.hpp"
#include "ssl3d/volume.hpp"

namespace ssl3d {

// On-disk element types of the supported NIfTI-1 subset; values are the
// header datatype codes.
enum class ElemType : std::int16_t {
  u8 = 2,
  i16 = 4,
  f32 = 16,
  u16 = 512,
};

std::string to_string(ElemType e);

enum class NiftiErrc {
  io,
  bad_size,
  big_endian,
  bad_magic,
  unsupported_datatype,
  bad_dim,
  bad_pixdim,
  bad_vox_offset,
  truncated,
  non_finite,
  not_representable,
};

class NiftiError : public Error {
 public:
  NiftiError(NiftiErrc code, const std::string& what) : Error(what), code_(code) {}
  NiftiErrc code() const { return code_; }

 private:
  NiftiErrc code_;
};

// qform/sform fields carried through untouched.
struct Orientation {
  std::int16_t qform_code = 0;
  std::int16_t sform_code = 0;
  float qfac = 1.0f;               // pixdim[0]
  std::array<float, 6> quatern{};  // b, c, d, qoffset x, y, z
  std::array<float, 12> srow{};    // srow_x, srow_y, srow_z
  bool operator==(const Orientation&) const = default;
};

struct Rescale {
  float slope = 1.0f;
  float intercept = 0.0f;
};

/// A loaded scan: voxel values (already rescaled) plus the metadata needed to
/// write it back.
struct Volume {
  ElemType elem = ElemType::f32;
  Image voxels;
  std::optional<Rescale> rescale;  // as found on disk, if slope != 0
  Orientation orientation;
};

struct NiftiHeaderInfo {
  Dims dims;
  Spacing spacing;
  ElemType elem;
};

Volume load_nifti(const std::filesystem::path& path);
NiftiHeaderInfo read_nifti_header(const std::filesystem::path& path);

/// Writes little-endian NIfTI-1 with scl_slope=1, scl_inter=0. Values must be
/// exactly representable in vol.elem.
void save_nifti(const Volume& vol, const std::filesystem::path& path, bool compress);

/// Encodes the uncompressed byte image of vol (header + padding + payload).
std::vector<std::uint8_t> encode_nifti(const Volume& vol);
Volume decode_nifti(std::span<const std::uint8_t> bytes, const std::string& origin);

bool has_gzip_extension(const std::filesystem::path& path);

// Conversions between scans and the typed grids used by the algorithms.
Volume make_volume(const Image& image, ElemType elem = ElemType::f32);
Volume make_volume(const LabelMap& map);
LabelMap to_label_map(const Volume& vol);  // values must be integers in 0..14

LabelMap load_label_map(const std::filesystem::path& path);
Image load_image(const std::filesystem::path& path);
void save_label_map(const LabelMap& map, const std::filesystem::path& path);
void save_image(const Image& image, const std::filesystem::path& path);

}  // namespace ssl3d
