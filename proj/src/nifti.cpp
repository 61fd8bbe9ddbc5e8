#include "ssl3d/nifti.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>

#include "ssl3d/taxonomy.hpp"

static_assert(std::endian::native == std::endian::little,
              "the NIfTI codec assumes a little-endian host");

namespace ssl3d {
namespace {

constexpr std::size_t kHeaderSize = 348;
constexpr std::size_t kVoxOffset = 352;

// Byte offsets into the 348-byte NIfTI-1 header.
namespace off {
constexpr std::size_t sizeof_hdr = 0;
constexpr std::size_t dim = 40;
constexpr std::size_t datatype = 70;
constexpr std::size_t bitpix = 72;
constexpr std::size_t pixdim = 76;
constexpr std::size_t vox_offset = 108;
constexpr std::size_t scl_slope = 112;
constexpr std::size_t scl_inter = 116;
constexpr std::size_t xyzt_units = 123;
constexpr std::size_t descrip = 148;
constexpr std::size_t qform_code = 252;
constexpr std::size_t sform_code = 254;
constexpr std::size_t quatern = 256;
constexpr std::size_t srow = 280;
constexpr std::size_t magic = 344;
}  // namespace off

template <typename T>
T get(std::span<const std::uint8_t> b, std::size_t at) {
  T v;
  std::memcpy(&v, b.data() + at, sizeof(T));
  return v;
}

template <typename T>
void put(std::vector<std::uint8_t>& b, std::size_t at, T v) {
  std::memcpy(b.data() + at, &v, sizeof(T));
}

std::size_t elem_bytes(ElemType e) {
  switch (e) {
    case ElemType::u8: return 1;
    case ElemType::i16:
    case ElemType::u16: return 2;
    case ElemType::f32: return 4;
  }
  return 0;
}

bool known_datatype(std::int16_t code) {
  return code == 2 || code == 4 || code == 16 || code == 512;
}

struct ParsedHeader {
  NiftiHeaderInfo info;
  Rescale rescale;
  bool has_rescale = false;
  Orientation orientation;
};

ParsedHeader parse_header(std::span<const std::uint8_t> b, const std::string& origin) {
  if (b.size() < kHeaderSize) {
    throw NiftiError(NiftiErrc::truncated, origin + ": truncated header (" +
                                               std::to_string(b.size()) + " bytes)");
  }
  const auto sizeof_hdr = get<std::int32_t>(b, off::sizeof_hdr);
  if (sizeof_hdr != static_cast<std::int32_t>(kHeaderSize)) {
    if (static_cast<std::int32_t>(__builtin_bswap32(static_cast<std::uint32_t>(sizeof_hdr))) == static_cast<std::int32_t>(kHeaderSize)) {
      throw NiftiError(NiftiErrc::big_endian,
                       origin + ": big-endian NIfTI files are not supported");
    }
    throw NiftiError(NiftiErrc::bad_size,
                     origin + ": sizeof_hdr is " + std::to_string(sizeof_hdr) + ", expected 348");
  }
  if (std::memcmp(b.data() + off::magic, "n+1\0", 4) != 0) {
    throw NiftiError(NiftiErrc::bad_magic, origin + ": bad magic (expected single-file \"n+1\")");
  }
  const auto ndim = get<std::int16_t>(b, off::dim);
  if (ndim != 3) {
    throw NiftiError(NiftiErrc::bad_dim,
                     origin + ": dim[0] is " + std::to_string(ndim) + ", only 3D volumes are supported");
  }
  std::array<std::int16_t, 3> n{};
  for (int a = 0; a < 3; ++a) {
    n[a] = get<std::int16_t>(b, off::dim + 2 * (a + 1));
    if (n[a] < 1) {
      throw NiftiError(NiftiErrc::bad_dim, origin + ": dim[" + std::to_string(a + 1) +
                                               "] is " + std::to_string(n[a]));
    }
  }
  const auto datatype = get<std::int16_t>(b, off::datatype);
  if (!known_datatype(datatype)) {
    throw NiftiError(NiftiErrc::unsupported_datatype,
                     origin + ": unsupported datatype code " + std::to_string(datatype));
  }
  std::array<double, 3> px{};
  for (int a = 0; a < 3; ++a) {
    px[a] = get<float>(b, off::pixdim + 4 * (a + 1));
    if (!std::isfinite(px[a]) || px[a] <= 0) {
      throw NiftiError(NiftiErrc::bad_pixdim, origin + ": pixdim[" + std::to_string(a + 1) +
                                                  "] is not positive");
    }
  }
  const auto vox_offset = get<float>(b, off::vox_offset);
  if (vox_offset != static_cast<float>(kVoxOffset)) {
    throw NiftiError(NiftiErrc::bad_vox_offset,
                     origin + ": vox_offset must be 352, got " + std::to_string(vox_offset));
  }

  ParsedHeader h;
  h.info.dims = Dims{static_cast<std::size_t>(n[0]), static_cast<std::size_t>(n[1]),
                     static_cast<std::size_t>(n[2])};
  h.info.spacing = Spacing{px[0], px[1], px[2]};
  h.info.elem = static_cast<ElemType>(datatype);
  const auto slope = get<float>(b, off::scl_slope);
  if (slope != 0.0f && std::isfinite(slope)) {
    h.has_rescale = true;
    h.rescale = Rescale{slope, get<float>(b, off::scl_inter)};
  }
  auto& o = h.orientation;
  o.qform_code = get<std::int16_t>(b, off::qform_code);
  o.sform_code = get<std::int16_t>(b, off::sform_code);
  o.qfac = get<float>(b, off::pixdim);
  for (std::size_t i = 0; i < o.quatern.size(); ++i) o.quatern[i] = get<float>(b, off::quatern + 4 * i);
  for (std::size_t i = 0; i < o.srow.size(); ++i) o.srow[i] = get<float>(b, off::srow + 4 * i);
  return h;
}

struct GzCloser {
  void operator()(gzFile f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<std::remove_pointer_t<gzFile>, GzCloser>;

// gzread passes uncompressed files through unchanged, so one reader serves
// both .nii and .nii.gz.
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path, std::size_t limit) {
  GzHandle f(gzopen(path.c_str(), "rb"));
  if (!f) throw NiftiError(NiftiErrc::io, path.string() + ": cannot open");
  std::vector<std::uint8_t> out;
  std::array<std::uint8_t, 1 << 16> buf{};
  while (out.size() < limit) {
    const auto want = static_cast<unsigned>(std::min(buf.size(), limit - out.size()));
    const int got = gzread(f.get(), buf.data(), want);
    if (got < 0) throw NiftiError(NiftiErrc::io, path.string() + ": read error");
    if (got == 0) break;
    out.insert(out.end(), buf.begin(), buf.begin() + got);
  }
  return out;
}

template <typename T>
bool fits(float v) {
  if (!std::isfinite(v) || std::trunc(v) != v) return false;
  return v >= static_cast<float>(std::numeric_limits<T>::min()) &&
         v <= static_cast<float>(std::numeric_limits<T>::max());
}

template <typename T>
void decode_payload(std::span<const std::uint8_t> payload, std::span<float> out, const Rescale* r) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    const T raw = get<T>(payload, i * sizeof(T));
    out[i] = r ? static_cast<float>(static_cast<double>(r->slope) * static_cast<double>(raw) +
                                    static_cast<double>(r->intercept))
               : static_cast<float>(raw);
  }
}

template <typename T>
void encode_payload(std::span<const float> in, std::vector<std::uint8_t>& b) {
  for (std::size_t i = 0; i < in.size(); ++i) {
    put<T>(b, kVoxOffset + i * sizeof(T), static_cast<T>(in[i]));
  }
}

}  // namespace

std::string to_string(ElemType e) {
  switch (e) {
    case ElemType::u8: return "uint8";
    case ElemType::i16: return "int16";
    case ElemType::u16: return "uint16";
    case ElemType::f32: return "float32";
  }
  return "unknown";
}

bool has_gzip_extension(const std::filesystem::path& path) { return path.extension() == ".gz"; }

Volume decode_nifti(std::span<const std::uint8_t> bytes, const std::string& origin) {
  const auto h = parse_header(bytes, origin);
  const std::size_t n = h.info.dims.count();
  const std::size_t need = kVoxOffset + n * elem_bytes(h.info.elem);
  if (bytes.size() < need) {
    throw NiftiError(NiftiErrc::truncated, origin + ": truncated payload (" +
                                               std::to_string(bytes.size()) + " of " +
                                               std::to_string(need) + " bytes)");
  }
  std::vector<float> values(n);
  const auto payload = bytes.subspan(kVoxOffset);
  const Rescale* r = h.has_rescale ? &h.rescale : nullptr;
  switch (h.info.elem) {
    case ElemType::u8: decode_payload<std::uint8_t>(payload, values, r); break;
    case ElemType::i16: decode_payload<std::int16_t>(payload, values, r); break;
    case ElemType::u16: decode_payload<std::uint16_t>(payload, values, r); break;
    case ElemType::f32: decode_payload<float>(payload, values, r); break;
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw NiftiError(NiftiErrc::non_finite, origin + ": non-finite voxel value");
  }
  Volume vol;
  vol.elem = h.info.elem;
  vol.voxels = Image(h.info.dims, h.info.spacing, std::move(values));
  if (h.has_rescale) vol.rescale = h.rescale;
  vol.orientation = h.orientation;
  return vol;
}

Volume load_nifti(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path, std::numeric_limits<std::size_t>::max());
  return decode_nifti(bytes, path.string());
}

NiftiHeaderInfo read_nifti_header(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path, kVoxOffset);
  return parse_header(bytes, path.string()).info;
}

std::vector<std::uint8_t> encode_nifti(const Volume& vol) {
  const auto& img = vol.voxels;
  const Dims d = img.dims();
  for (int a = 0; a < 3; ++a) {
    if (d[a] > static_cast<std::size_t>(std::numeric_limits<std::int16_t>::max())) {
      throw NiftiError(NiftiErrc::bad_dim, "dimension too large for NIfTI-1: " + to_string(d));
    }
  }
  const auto values = img.data();
  for (float v : values) {
    bool ok = true;
    switch (vol.elem) {
      case ElemType::u8: ok = fits<std::uint8_t>(v); break;
      case ElemType::i16: ok = fits<std::int16_t>(v); break;
      case ElemType::u16: ok = fits<std::uint16_t>(v); break;
      case ElemType::f32: ok = std::isfinite(v); break;
    }
    if (!ok) {
      throw NiftiError(NiftiErrc::not_representable,
                       "value " + std::to_string(v) + " is not representable as " + to_string(vol.elem));
    }
  }

  std::vector<std::uint8_t> b(kVoxOffset + values.size() * elem_bytes(vol.elem), 0);
  put<std::int32_t>(b, off::sizeof_hdr, static_cast<std::int32_t>(kHeaderSize));
  const std::array<std::int16_t, 8> dim{3,
                                        static_cast<std::int16_t>(d.nx),
                                        static_cast<std::int16_t>(d.ny),
                                        static_cast<std::int16_t>(d.nz),
                                        1, 1, 1, 1};
  for (std::size_t i = 0; i < dim.size(); ++i) put<std::int16_t>(b, off::dim + 2 * i, dim[i]);
  put<std::int16_t>(b, off::datatype, static_cast<std::int16_t>(vol.elem));
  put<std::int16_t>(b, off::bitpix, static_cast<std::int16_t>(8 * elem_bytes(vol.elem)));
  const auto& s = img.spacing();
  const std::array<float, 4> pixdim{vol.orientation.qfac, static_cast<float>(s.dx),
                                    static_cast<float>(s.dy), static_cast<float>(s.dz)};
  for (std::size_t i = 0; i < pixdim.size(); ++i) put<float>(b, off::pixdim + 4 * i, pixdim[i]);
  put<float>(b, off::vox_offset, static_cast<float>(kVoxOffset));
  put<float>(b, off::scl_slope, 1.0f);
  put<float>(b, off::scl_inter, 0.0f);
  b[off::xyzt_units] = 2 | 8;  // mm, s
  constexpr char kDescrip[] = "ssl3d";
  std::memcpy(b.data() + off::descrip, kDescrip, sizeof(kDescrip) - 1);
  const auto& o = vol.orientation;
  put<std::int16_t>(b, off::qform_code, o.qform_code);
  put<std::int16_t>(b, off::sform_code, o.sform_code);
  for (std::size_t i = 0; i < o.quatern.size(); ++i) put<float>(b, off::quatern + 4 * i, o.quatern[i]);
  for (std::size_t i = 0; i < o.srow.size(); ++i) put<float>(b, off::srow + 4 * i, o.srow[i]);
  std::memcpy(b.data() + off::magic, "n+1\0", 4);

  switch (vol.elem) {
    case ElemType::u8: encode_payload<std::uint8_t>(values, b); break;
    case ElemType::i16: encode_payload<std::int16_t>(values, b); break;
    case ElemType::u16: encode_payload<std::uint16_t>(values, b); break;
    case ElemType::f32: encode_payload<float>(values, b); break;
  }
  return b;
}

void save_nifti(const Volume& vol, const std::filesystem::path& path, bool compress) {
  const auto bytes = encode_nifti(vol);
  if (compress) {
    GzHandle f(gzopen(path.c_str(), "wb6"));
    if (!f) throw NiftiError(NiftiErrc::io, path.string() + ": cannot open for writing");
    std::size_t done = 0;
    while (done < bytes.size()) {
      const auto chunk = static_cast<unsigned>(std::min<std::size_t>(bytes.size() - done, 1u << 30));
      if (gzwrite(f.get(), bytes.data() + done, chunk) != static_cast<int>(chunk)) {
        throw NiftiError(NiftiErrc::io, path.string() + ": write error");
      }
      done += chunk;
    }
    if (gzclose(f.release()) != Z_OK) throw NiftiError(NiftiErrc::io, path.string() + ": write error");
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw NiftiError(NiftiErrc::io, path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw NiftiError(NiftiErrc::io, path.string() + ": write error");
}

Volume make_volume(const Image& image, ElemType elem) {
  Volume v;
  v.elem = elem;
  v.voxels = image;
  return v;
}

Volume make_volume(const LabelMap& map) {
  Volume v;
  v.elem = ElemType::u8;
  std::vector<float> values(map.data().begin(), map.data().end());
  v.voxels = Image(map.dims(), map.spacing(), std::move(values));
  return v;
}

LabelMap to_label_map(const Volume& vol) {
  const auto in = vol.voxels.data();
  std::vector<std::uint8_t> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const float v = in[i];
    if (std::trunc(v) != v || v < 0 || v >= kNumClasses) {
      throw InvalidArgument("label volume contains value " + std::to_string(v) +
                            " outside the class range 0..14");
    }
    out[i] = static_cast<std::uint8_t>(v);
  }
  return LabelMap(vol.voxels.dims(), vol.voxels.spacing(), std::move(out));
}

LabelMap load_label_map(const std::filesystem::path& path) {
  try {
    return to_label_map(load_nifti(path));
  } catch (const NiftiError&) {
    throw;
  } catch (const Error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
}

Image load_image(const std::filesystem::path& path) { return load_nifti(path).voxels; }

void save_label_map(const LabelMap& map, const std::filesystem::path& path) {
  save_nifti(make_volume(map), path, has_gzip_extension(path));
}

void save_image(const Image& image, const std::filesystem::path& path) {
  save_nifti(make_volume(image), path, has_gzip_extension(path));
}

}  // namespace ssl3d
