#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ssl3d/error.hpp"

namespace ssl3d {

struct Dims {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::size_t nz = 0;

  constexpr std::size_t count() const { return nx * ny * nz; }
  constexpr std::size_t index(std::size_t x, std::size_t y, std::size_t z) const {
    return x + nx * (y + ny * z);
  }
  constexpr std::size_t operator[](int axis) const {
    return axis == 0 ? nx : (axis == 1 ? ny : nz);
  }
  bool operator==(const Dims&) const = default;
};

std::string to_string(const Dims& d);

/// Millimeters per voxel along x, y, z.
struct Spacing {
  double dx = 1.0;
  double dy = 1.0;
  double dz = 1.0;

  constexpr double operator[](int axis) const { return axis == 0 ? dx : (axis == 1 ? dy : dz); }
  bool valid() const;
  void validate() const;  // throws InvalidArgument
  bool operator==(const Spacing&) const = default;
};

bool approx_equal(const Spacing& a, const Spacing& b, double tol = 1e-6);
std::string to_string(const Spacing& s);

// Dense x-fastest voxel grid. The tag separates grids that share an element
// type but mean different things (label maps vs binary masks).
template <typename T, typename Tag>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(Dims dims, Spacing spacing, T fill = T{})
      : dims_(dims), spacing_(spacing), data_(dims.count(), fill) {
    check_dims();
  }
  Grid(Dims dims, Spacing spacing, std::vector<T> data)
      : dims_(dims), spacing_(spacing), data_(std::move(data)) {
    check_dims();
    if (data_.size() != dims_.count()) {
      throw ShapeMismatch("voxel buffer has " + std::to_string(data_.size()) +
                          " elements, dims " + to_string(dims_) + " need " +
                          std::to_string(dims_.count()));
    }
  }

  const Dims& dims() const { return dims_; }
  const Spacing& spacing() const { return spacing_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }
  T& at(std::size_t x, std::size_t y, std::size_t z) { return data_[dims_.index(x, y, z)]; }
  const T& at(std::size_t x, std::size_t y, std::size_t z) const {
    return data_[dims_.index(x, y, z)];
  }

  bool operator==(const Grid&) const = default;

 private:
  void check_dims() const {
    if (dims_.nx == 0 || dims_.ny == 0 || dims_.nz == 0) {
      throw InvalidArgument("grid dims must be positive, got " + to_string(dims_));
    }
    spacing_.validate();
  }

  Dims dims_;
  Spacing spacing_;
  std::vector<T> data_;
};

struct ImageTag {};
struct LabelTag {};
struct MaskTag {};
struct DistanceTag {};

using Image = Grid<float, ImageTag>;
using LabelMap = Grid<std::uint8_t, LabelTag>;
using Mask = Grid<std::uint8_t, MaskTag>;
using DistanceMap = Grid<double, DistanceTag>;

template <typename A, typename B>
bool same_shape(const A& a, const B& b) {
  return a.dims() == b.dims();
}

template <typename A, typename B>
void require_same_shape(const A& a, const B& b, const char* what) {
  if (!same_shape(a, b)) {
    throw ShapeMismatch(std::string(what) + ": dim mismatch " + to_string(a.dims()) + " vs " +
                        to_string(b.dims()));
  }
}

/// Number of voxels equal to class_id. Throws for class_id > 14.
std::size_t voxel_count(const LabelMap& map, int class_id);

/// Throws InvalidArgument if any voxel exceeds the last class index.
void validate_labels(const LabelMap& map);

Mask binarize(const LabelMap& map, std::uint8_t class_id);
void validate_binary(const Mask& mask, const char* what);

}  // namespace ssl3d
