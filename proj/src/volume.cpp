#include "ssl3d/volume.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ssl3d/taxonomy.hpp"

namespace ssl3d {

std::string to_string(const Dims& d) {
  std::ostringstream os;
  os << "(" << d.nx << "," << d.ny << "," << d.nz << ")";
  return os.str();
}

bool Spacing::valid() const {
  return std::isfinite(dx) && std::isfinite(dy) && std::isfinite(dz) && dx > 0 && dy > 0 &&
         dz > 0;
}

void Spacing::validate() const {
  if (!valid()) throw InvalidArgument("spacing must be positive and finite, got " + to_string(*this));
}

bool approx_equal(const Spacing& a, const Spacing& b, double tol) {
  return std::abs(a.dx - b.dx) <= tol && std::abs(a.dy - b.dy) <= tol &&
         std::abs(a.dz - b.dz) <= tol;
}

std::string to_string(const Spacing& s) {
  std::ostringstream os;
  os << "(" << s.dx << "," << s.dy << "," << s.dz << ")";
  return os.str();
}

std::size_t voxel_count(const LabelMap& map, int class_id) {
  if (class_id < 0 || class_id >= kNumClasses) {
    throw InvalidArgument("class id " + std::to_string(class_id) + " out of range 0..14");
  }
  const auto v = static_cast<std::uint8_t>(class_id);
  return static_cast<std::size_t>(std::count(map.data().begin(), map.data().end(), v));
}

void validate_labels(const LabelMap& map) {
  const auto it = std::find_if(map.data().begin(), map.data().end(),
                               [](std::uint8_t v) { return v >= kNumClasses; });
  if (it != map.data().end()) {
    throw InvalidArgument("label value " + std::to_string(*it) + " exceeds 14");
  }
}

Mask binarize(const LabelMap& map, std::uint8_t class_id) {
  Mask out(map.dims(), map.spacing());
  const auto in = map.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = in[i] == class_id ? 1 : 0;
  return out;
}

void validate_binary(const Mask& mask, const char* what) {
  for (auto v : mask.data()) {
    if (v > 1) throw InvalidArgument(std::string(what) + ": mask is not binary");
  }
}

}  // namespace ssl3d
