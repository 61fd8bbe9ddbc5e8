#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ssl3d/taxonomy.hpp"
#include "ssl3d/volume.hpp"

namespace ssl3d {

enum class Connectivity { face = 6, full = 26 };

Connectivity connectivity_from_int(int n);  // 6 or 26

struct ComponentTag {};
using ComponentLabels = Grid<std::uint32_t, ComponentTag>;

struct ComponentMap {
  ComponentLabels labels;          // 0 = background, 1..K = component id
  std::vector<std::size_t> sizes;  // sizes[k - 1] is the size of component k

  std::size_t count() const { return sizes.size(); }
};

/// Component ids follow first encounter in x-fastest scan order.
ComponentMap connected_components(const Mask& mask, Connectivity connectivity);

/// For each listed class, drops every voxel outside its largest component
/// (ties go to the lowest component id). Other classes are untouched.
LabelMap keep_largest(const LabelMap& map, const ClassSet& classes, Connectivity connectivity);

}  // namespace ssl3d
