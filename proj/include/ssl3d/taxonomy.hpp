#pragma once

#include <array>
#include <bitset>
#include <cstdint>
#include <string_view>
#include <vector>

namespace ssl3d {

inline constexpr int kNumClasses = 15;  // background + 13 organs + tumor
inline constexpr std::uint8_t kBackground = 0;
inline constexpr std::uint8_t kFirstOrgan = 1;
inline constexpr std::uint8_t kLastOrgan = 13;
inline constexpr std::uint8_t kTumor = 14;

// Rows of the reported results table, in order. Index == class id.
inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "Background",
    "Liver",
    "Right Kidney",
    "Spleen",
    "Pancreas",
    "Aorta",
    "Inferior vena cava",
    "Right adrenal gland",
    "Left adrenal gland",
    "Gallbladder",
    "Esophagus",
    "Stomach",
    "Duodenum",
    "Left kidney",
    "Tumor",
};

constexpr bool is_organ(int c) { return c >= kFirstOrgan && c <= kLastOrgan; }
constexpr bool is_foreground_class(int c) { return c >= 1 && c <= kTumor; }


using ClassSet = std::bitset<kNumClasses>;

inline ClassSet organ_classes() {
  ClassSet s;
  for (int c = kFirstOrgan; c <= kLastOrgan; ++c) s.set(c);
  return s;
}

inline ClassSet tumor_class() { return ClassSet{}.set(kTumor); }

inline ClassSet all_foreground_classes() { return organ_classes().set(kTumor); }

inline std::vector<int> members(const ClassSet& s) {
  std::vector<int> out;
  for (int c = 0; c < kNumClasses; ++c) {
    if (s.test(c)) out.push_back(c);
  }
  return out;
}

}  // namespace ssl3d
