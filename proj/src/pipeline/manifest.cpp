#include "ssl3d/pipeline/manifest.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <set>

#include "ssl3d/nifti.hpp"
#include "ssl3d/preprocess.hpp"

namespace ssl3d {

namespace fs = std::filesystem;

std::string to_string(AnnotationStatus s) {
  switch (s) {
    case AnnotationStatus::full: return "full";
    case AnnotationStatus::tumor_only: return "tumor_only";
    case AnnotationStatus::organ_only: return "organ_only";
    case AnnotationStatus::unlabeled: return "unlabeled";
  }
  return "unknown";
}

AnnotationStatus parse_annotation_status(const std::string& s) {
  if (s == "full") return AnnotationStatus::full;
  if (s == "tumor_only") return AnnotationStatus::tumor_only;
  if (s == "organ_only") return AnnotationStatus::organ_only;
  if (s == "unlabeled") return AnnotationStatus::unlabeled;
  throw InvalidArgument("unknown annotation_status '" + s + "'");
}

void CaseRecord::validate() const {
  const auto fail = [&](const std::string& why) {
    throw InvalidArgument("case '" + case_id + "': " + why);
  };
  if (case_id.empty()) throw InvalidArgument("case record with empty case_id");
  if (annotated_classes.test(kBackground)) fail("background cannot be an annotated class");
  switch (annotation_status) {
    case AnnotationStatus::full:
      if (annotated_classes != all_foreground_classes()) fail("status full requires classes 1..14");
      break;
    case AnnotationStatus::tumor_only:
      if (annotated_classes != tumor_class()) fail("status tumor_only requires annotated_classes {14}");
      break;
    case AnnotationStatus::organ_only:
      if (annotated_classes.none() || annotated_classes.test(kTumor)) {
        fail("status organ_only requires a nonempty subset of organ classes 1..13");
      }
      break;
    case AnnotationStatus::unlabeled:
      if (annotated_classes.any()) fail("status unlabeled cannot annotate classes");
      break;
  }
  const bool labeled = annotation_status != AnnotationStatus::unlabeled;
  if (labeled != label_path.has_value()) {
    fail(labeled ? "label_path is required for labeled cases" : "unlabeled case has a label_path");
  }
}

const CaseRecord* Manifest::find(const std::string& case_id) const {
  for (const auto& c : cases) {
    if (c.case_id == case_id) return &c;
  }
  return nullptr;
}

namespace {

ClassSet default_classes(AnnotationStatus s) {
  switch (s) {
    case AnnotationStatus::full: return all_foreground_classes();
    case AnnotationStatus::tumor_only: return tumor_class();
    case AnnotationStatus::organ_only: return organ_classes();
    case AnnotationStatus::unlabeled: return {};
  }
  return {};
}

CaseRecord parse_record(const nlohmann::json& j, const fs::path& root) {
  if (!j.is_object()) throw InvalidArgument("manifest entries must be objects");
  CaseRecord r;
  r.case_id = j.at("case_id").get<std::string>();
  r.image_path = root / j.at("image_path").get<std::string>();
  if (j.contains("label_path") && !j["label_path"].is_null()) {
    r.label_path = root / j["label_path"].get<std::string>();
  }
  r.annotation_status = parse_annotation_status(j.at("annotation_status").get<std::string>());
  if (j.contains("annotated_classes")) {
    for (int c : j["annotated_classes"].get<std::vector<int>>()) {
      if (c < 0 || c >= kNumClasses) {
        throw InvalidArgument("case '" + r.case_id + "': class " + std::to_string(c) + " out of range");
      }
      r.annotated_classes.set(c);
    }
  } else {
    r.annotated_classes = default_classes(r.annotation_status);
  }
  return r;
}

}  // namespace

Manifest parse_manifest(const nlohmann::json& j, const fs::path& base_dir, bool check_files) {
  Manifest m;
  const nlohmann::json* cases = &j;
  m.root = base_dir;
  if (j.is_object()) {
    if (j.contains("root")) m.root = base_dir / j["root"].get<std::string>();
    cases = &j.at("cases");
    if (j.contains("pseudo_label_sources")) {
      for (const auto& s : j["pseudo_label_sources"]) {
        m.pseudo_label_sources.push_back(
            {s.at("id").get<std::string>(), m.root / s.at("dir").get<std::string>()});
      }
    }
  }
  if (!cases->is_array()) throw InvalidArgument("manifest must be an array of case records");

  std::set<std::string> ids;
  for (const auto& e : *cases) {
    auto r = parse_record(e, m.root);
    r.validate();
    if (!ids.insert(r.case_id).second) throw InvalidArgument("duplicate case_id '" + r.case_id + "'");
    if (check_files) {
      if (!fs::exists(r.image_path)) {
        throw InvalidArgument("case '" + r.case_id + "': image not found: " + r.image_path.string());
      }
      if (r.label_path && !fs::exists(*r.label_path)) {
        throw InvalidArgument("case '" + r.case_id + "': label not found: " + r.label_path->string());
      }
    }
    m.cases.push_back(std::move(r));
  }
  std::set<std::string> source_ids;
  for (const auto& s : m.pseudo_label_sources) {
    if (!source_ids.insert(s.id).second) throw InvalidArgument("duplicate pseudo label source '" + s.id + "'");
    if (check_files && !fs::is_directory(s.dir)) {
      throw InvalidArgument("pseudo label source '" + s.id + "': not a directory: " + s.dir.string());
    }
  }
  return m;
}

Manifest load_manifest(const fs::path& path, bool check_files) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("manifest " + path.string() + ": " + e.what());
  }
  Manifest m;
  try {
    m = parse_manifest(j, fs::absolute(path).parent_path(), check_files);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("manifest " + path.string() + ": " + e.what());
  }
  const auto c = count_status(m);
  spdlog::info("manifest {}: {} cases (full {}, tumor_only {}, organ_only {}, unlabeled {})",
               path.string(), m.cases.size(), c.full, c.tumor_only, c.organ_only, c.unlabeled);
  return m;
}

StatusCounts count_status(const Manifest& m) {
  StatusCounts c;
  for (const auto& r : m.cases) {
    switch (r.annotation_status) {
      case AnnotationStatus::full: ++c.full; break;
      case AnnotationStatus::tumor_only: ++c.tumor_only; break;
      case AnnotationStatus::organ_only: ++c.organ_only; break;
      case AnnotationStatus::unlabeled: ++c.unlabeled; break;
    }
  }
  return c;
}

Spacing median_spacing(const Manifest& m) {
  if (m.cases.empty()) throw InvalidArgument("median spacing of an empty manifest");
  std::vector<Spacing> spacings;
  for (const auto& c : m.cases) spacings.push_back(read_nifti_header(c.image_path).spacing);
  return median_spacing(std::span<const Spacing>(spacings));
}

}  // namespace ssl3d
