#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssl3d/taxonomy.hpp"
#include "ssl3d/volume.hpp"

namespace ssl3d {

enum class AnnotationStatus { full, tumor_only, organ_only, unlabeled };

std::string to_string(AnnotationStatus s);
AnnotationStatus parse_annotation_status(const std::string& s);

struct CaseRecord {
  std::string case_id;
  std::filesystem::path image_path;                // absolute after loading
  std::optional<std::filesystem::path> label_path;  // absent iff unlabeled
  AnnotationStatus annotation_status = AnnotationStatus::unlabeled;
  ClassSet annotated_classes;

  void validate() const;
};

/// Pseudo labels produced elsewhere; `dir` holds `<case_id>.nii.gz` files.
struct ExternalLabelSource {
  std::string id;
  std::filesystem::path dir;
};

struct Manifest {
  std::filesystem::path root;
  std::vector<CaseRecord> cases;
  std::vector<ExternalLabelSource> pseudo_label_sources;

  const CaseRecord* find(const std::string& case_id) const;
};

struct StatusCounts {
  std::size_t full = 0;
  std::size_t tumor_only = 0;
  std::size_t organ_only = 0;
  std::size_t unlabeled = 0;
  bool operator==(const StatusCounts&) const = default;
};

/// Accepts either a JSON array of case records (root = the manifest's
/// directory) or an object {"root", "cases", "pseudo_label_sources"}.
Manifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir,
                        bool check_files = true);
Manifest load_manifest(const std::filesystem::path& path, bool check_files = true);

StatusCounts count_status(const Manifest& m);

/// Per-axis lower median of the case image spacings (reads headers only).
Spacing median_spacing(const Manifest& m);

}  // namespace ssl3d
