#include "ssl3d/pipeline/state.hpp"

#include <openssl/evp.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace ssl3d {

namespace fs = std::filesystem;

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string() + " for digest");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

bool LabelFile::intact() const {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) return false;
  return file_digest(path) == digest;
}

std::string to_string(CaseStatus s) {
  switch (s) {
    case CaseStatus::pending: return "pending";
    case CaseStatus::pseudo_labeled: return "pseudo_labeled";
    case CaseStatus::fused: return "fused";
    case CaseStatus::failed: return "failed";
  }
  return "unknown";
}

std::string to_string(RoundStage s) {
  switch (s) {
    case RoundStage::idle: return "idle";
    case RoundStage::trained: return "trained";
    case RoundStage::predicted: return "predicted";
  }
  return "unknown";
}

namespace {

CaseStatus parse_case_status(const std::string& s) {
  for (auto v : {CaseStatus::pending, CaseStatus::pseudo_labeled, CaseStatus::fused, CaseStatus::failed}) {
    if (to_string(v) == s) return v;
  }
  throw InvalidArgument("state: unknown case status '" + s + "'");
}

RoundStage parse_stage(const std::string& s) {
  for (auto v : {RoundStage::idle, RoundStage::trained, RoundStage::predicted}) {
    if (to_string(v) == s) return v;
  }
  throw InvalidArgument("state: unknown round stage '" + s + "'");
}

nlohmann::json label_json(const LabelFile& f) { return {{"path", f.path.string()}, {"digest", f.digest}}; }

LabelFile label_from(const nlohmann::json& j) {
  return {j.at("path").get<std::string>(), j.at("digest").get<std::string>()};
}

nlohmann::json label_map_json(const std::map<std::string, LabelFile>& m) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [id, f] : m) j[id] = label_json(f);
  return j;
}

std::map<std::string, LabelFile> label_map_from(const nlohmann::json& j) {
  std::map<std::string, LabelFile> m;
  for (auto it = j.begin(); it != j.end(); ++it) m[it.key()] = label_from(*it);
  return m;
}

}  // namespace

nlohmann::json to_json(const PipelineState& s) {
  nlohmann::json cases = nlohmann::json::object();
  for (const auto& [id, c] : s.cases) {
    nlohmann::json e = {{"status", to_string(c.status)}};
    if (c.pseudo) e["pseudo"] = label_json(*c.pseudo);
    if (c.fused) e["fused"] = label_json(*c.fused);
    cases[id] = std::move(e);
  }
  nlohmann::json phases = nlohmann::json::object();
  for (const auto& [p, m] : s.phase_labels) phases[p] = label_map_json(m);
  nlohmann::json history = nlohmann::json::array();
  for (const auto& h : s.history) {
    nlohmann::json e = {{"phase", to_string(h.phase)},
                        {"round", h.round},
                        {"cases_labeled", h.cases_labeled},
                        {"cases_failed", h.cases_failed},
                        {"class_voxels", h.class_voxels},
                        {"changed_fraction", h.changed_fraction},
                        {"heldout_mean_dsc", nullptr},
                        {"heldout_mean_nsd", nullptr}};
    if (h.heldout_mean_dsc) e["heldout_mean_dsc"] = *h.heldout_mean_dsc;
    if (h.heldout_mean_nsd) e["heldout_mean_nsd"] = *h.heldout_mean_nsd;
    history.push_back(std::move(e));
  }
  nlohmann::json j = {{"version", 1},
                      {"phase", to_string(s.phase)},
                      {"round", s.round},
                      {"phase_stopped", s.phase_stopped},
                      {"stage", to_string(s.stage)},
                      {"cases", std::move(cases)},
                      {"phase_labels", std::move(phases)},
                      {"final_labels", label_map_json(s.final_labels)},
                      {"history", std::move(history)},
                      {"target_spacing", nullptr},
                      {"config_snapshot", s.config_snapshot}};
  if (s.target_spacing) {
    j["target_spacing"] = {s.target_spacing->dx, s.target_spacing->dy, s.target_spacing->dz};
  }
  return j;
}

PipelineState state_from_json(const nlohmann::json& j) {
  PipelineState s;
  try {
    if (j.at("version").get<int>() != 1) throw InvalidArgument("state: unsupported version");
    s.phase = parse_phase(j.at("phase").get<std::string>());
    s.round = j.at("round").get<int>();
    s.phase_stopped = j.at("phase_stopped").get<bool>();
    s.stage = parse_stage(j.at("stage").get<std::string>());
    for (auto it = j.at("cases").begin(); it != j.at("cases").end(); ++it) {
      CaseProgress c;
      c.status = parse_case_status(it->at("status").get<std::string>());
      if (it->contains("pseudo")) c.pseudo = label_from((*it)["pseudo"]);
      if (it->contains("fused")) c.fused = label_from((*it)["fused"]);
      s.cases[it.key()] = std::move(c);
    }
    for (auto it = j.at("phase_labels").begin(); it != j.at("phase_labels").end(); ++it) {
      s.phase_labels[it.key()] = label_map_from(*it);
    }
    s.final_labels = label_map_from(j.at("final_labels"));
    for (const auto& e : j.at("history")) {
      RoundSummary h;
      h.phase = parse_phase(e.at("phase").get<std::string>());
      h.round = e.at("round").get<int>();
      h.cases_labeled = e.at("cases_labeled").get<std::size_t>();
      h.cases_failed = e.at("cases_failed").get<std::size_t>();
      h.class_voxels = e.at("class_voxels").get<std::array<std::size_t, kNumClasses>>();
      h.changed_fraction = e.at("changed_fraction").get<double>();
      if (!e.at("heldout_mean_dsc").is_null()) h.heldout_mean_dsc = e["heldout_mean_dsc"].get<double>();
      if (!e.at("heldout_mean_nsd").is_null()) h.heldout_mean_nsd = e["heldout_mean_nsd"].get<double>();
      s.history.push_back(h);
    }
    if (!j.at("target_spacing").is_null()) {
      const auto v = j["target_spacing"].get<std::vector<double>>();
      s.target_spacing = Spacing{v.at(0), v.at(1), v.at(2)};
    }
    s.config_snapshot = j.at("config_snapshot");
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("state: ") + e.what());
  }
  return s;
}

bool StateStore::exists() const { return fs::exists(path_); }

PipelineState StateStore::load() const {
  std::ifstream in(path_);
  if (!in) throw InvalidArgument("cannot open state " + path_.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("state " + path_.string() + ": " + e.what());
  }
  return state_from_json(j);
}

void StateStore::save(const PipelineState& state) {
  if (path_.has_parent_path()) fs::create_directories(path_.parent_path());
  const fs::path tmp = path_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write state " + tmp.string());
    out << to_json(state).dump(2) << '\n';
    out.flush();
    if (!out) throw Error("cannot write state " + tmp.string());
  }
  fs::rename(tmp, path_);
  if (crash_after_ > 0 && ++saves_ >= crash_after_) std::_Exit(86);
}

}  // namespace ssl3d
