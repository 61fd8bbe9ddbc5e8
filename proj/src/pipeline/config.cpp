#include "ssl3d/pipeline/config.hpp"

#include <fstream>
#include <sstream>

namespace ssl3d {

namespace fs = std::filesystem;

std::string to_string(Phase p) {
  switch (p) {
    case Phase::tumor: return "tumor";
    case Phase::organ: return "organ";
    case Phase::merge: return "merge";
    case Phase::done: return "done";
  }
  return "unknown";
}

Phase parse_phase(const std::string& s) {
  if (s == "tumor") return Phase::tumor;
  if (s == "organ") return Phase::organ;
  if (s == "merge") return Phase::merge;
  if (s == "done") return Phase::done;
  throw InvalidArgument("unknown phase '" + s + "'");
}

ClassSet phase_classes(Phase p) {
  if (p == Phase::tumor) return tumor_class();
  if (p == Phase::organ) return organ_classes();
  return all_foreground_classes();
}

std::string to_string(OutputMode m) { return m == OutputMode::labels ? "labels" : "probabilities"; }

OutputMode parse_output_mode(const std::string& s) {
  if (s == "labels") return OutputMode::labels;
  if (s == "probabilities") return OutputMode::probabilities;
  throw InvalidArgument("unknown segmenter output_mode '" + s + "'");
}

void SegmenterContract::validate() const {
  if (train_cmd.empty()) throw InvalidArgument("segmenter.train_cmd is empty");
  if (predict_cmd.empty()) throw InvalidArgument("segmenter.predict_cmd is empty");
}

nlohmann::json default_config_json() {
  const NormalizationParams n;
  return {
      {"work_dir", "work"},
      {"normalization", {{"clip_lo", n.clip_lo}, {"clip_hi", n.clip_hi}, {"mean", n.mean}, {"std", n.std}}},
      {"preprocess", {{"enabled", false}, {"target_spacing", "median"}}},
      {"fusion",
       {{"gt_overrides", true},
        {"tumor_overrides_organ", true},
        {"gt_background_trust", false},
        {"min_votes", nullptr}}},
      {"nsd", {{"tau", 1.0}}},
      {"tta", {{"enabled", true}}},
      {"postprocess", {{"connectivity", 26}, {"keep_largest_classes", members(organ_classes())}}},
      {"rounds", {{"tumor", 2}, {"organ", 2}}},
      {"phase_order", {"tumor", "organ"}},
      {"stop_change_fraction", nullptr},
      {"workers", 2},
      {"segmenter", {{"train_cmd", ""}, {"predict_cmd", ""}, {"output_mode", "probabilities"}}},
  };
}

void apply_override(nlohmann::json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw InvalidArgument("override '" + assignment + "' is not of the form key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  std::string pointer;
  std::istringstream parts(key);
  for (std::string part; std::getline(parts, part, '.');) pointer += "/" + part;
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  config[nlohmann::json::json_pointer(pointer)] = std::move(value);
}

namespace {

Spacing parse_spacing(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw InvalidArgument("spacing must have 3 components");
  Spacing s{v[0], v[1], v[2]};
  s.validate();
  return s;
}

ClassSet parse_class_list(const nlohmann::json& j) {
  ClassSet s;
  for (int c : j.get<std::vector<int>>()) {
    if (!is_foreground_class(c)) throw InvalidArgument("class " + std::to_string(c) + " out of range 1..14");
    s.set(c);
  }
  return s;
}

// Merges `patch` into `base` key by key (objects recursively).
void merge_into(nlohmann::json& base, const nlohmann::json& patch) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
      merge_into(base[it.key()], *it);
    } else {
      base[it.key()] = *it;
    }
  }
}

}  // namespace

PipelineConfig parse_config(const nlohmann::json& user, const fs::path& base_dir) {
  if (!user.is_object()) throw InvalidArgument("config must be a JSON object");
  nlohmann::json j = default_config_json();
  merge_into(j, user);

  PipelineConfig c;
  try {
    c.work_dir = base_dir / j.at("work_dir").get<std::string>();
    const auto& n = j.at("normalization");
    c.normalization = {n.at("clip_lo").get<double>(), n.at("clip_hi").get<double>(),
                       n.at("mean").get<double>(), n.at("std").get<double>()};
    c.normalization.validate();

    const auto& pre = j.at("preprocess");
    c.preprocess_enabled = pre.at("enabled").get<bool>();
    const auto& target = pre.at("target_spacing");
    if (target.is_string()) {
      if (target.get<std::string>() != "median") {
        throw InvalidArgument("preprocess.target_spacing must be \"median\" or [x, y, z]");
      }
    } else {
      c.target_spacing = parse_spacing(target);
    }

    const auto& f = j.at("fusion");
    if (f.contains("source_priority")) {
      c.fusion.source_priority = f["source_priority"].get<std::vector<std::string>>();
      c.fusion_priority_explicit = true;
    } else {
      c.fusion.source_priority = {"self"};
    }
    c.fusion.gt_overrides = f.at("gt_overrides").get<bool>();
    c.fusion.tumor_overrides_organ = f.at("tumor_overrides_organ").get<bool>();
    c.fusion.gt_background_trust = f.at("gt_background_trust").get<bool>();
    if (!f.at("min_votes").is_null()) c.fusion.min_votes = f["min_votes"].get<std::size_t>();
    c.fusion.validate();

    c.nsd.tau = j.at("nsd").at("tau").get<double>();
    c.nsd.validate();
    c.tta = j.at("tta").at("enabled").get<bool>();

    const auto& post = j.at("postprocess");
    c.connectivity = connectivity_from_int(post.at("connectivity").get<int>());
    c.keep_largest_classes = parse_class_list(post.at("keep_largest_classes"));

    c.rounds_tumor = j.at("rounds").at("tumor").get<int>();
    c.rounds_organ = j.at("rounds").at("organ").get<int>();
    if (c.rounds_tumor < 0 || c.rounds_organ < 0) throw InvalidArgument("round counts must be >= 0");

    c.phase_order.clear();
    for (const auto& p : j.at("phase_order").get<std::vector<std::string>>()) {
      const Phase ph = parse_phase(p);
      if (ph != Phase::tumor && ph != Phase::organ) {
        throw InvalidArgument("phase_order may only list tumor and organ");
      }
      c.phase_order.push_back(ph);
    }
    if (c.phase_order.size() != 2 || c.phase_order[0] == c.phase_order[1]) {
      throw InvalidArgument("phase_order must list tumor and organ once each");
    }

    if (!j.at("stop_change_fraction").is_null()) {
      c.stop_change_fraction = j["stop_change_fraction"].get<double>();
      if (*c.stop_change_fraction < 0) throw InvalidArgument("stop_change_fraction must be >= 0");
    }
    c.workers = j.at("workers").get<int>();
    if (c.workers < 1) throw InvalidArgument("workers must be >= 1");

    const auto& s = j.at("segmenter");
    c.segmenter.train_cmd = s.at("train_cmd").get<std::string>();
    c.segmenter.predict_cmd = s.at("predict_cmd").get<std::string>();
    c.segmenter.output_mode = parse_output_mode(s.at("output_mode").get<std::string>());

    if (j.contains("evaluation") && j["evaluation"].contains("manifest")) {
      c.heldout_manifest = base_dir / j["evaluation"]["manifest"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  c.snapshot = std::move(j);
  return c;
}

PipelineConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  nlohmann::json j = nlohmann::json::object();
  fs::path base = fs::current_path();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config " + path.string());
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("config " + path.string() + ": " + e.what());
    }
    base = fs::absolute(path).parent_path();
  }
  for (const auto& o : overrides) apply_override(j, o);
  return parse_config(j, base);
}

}  // namespace ssl3d
