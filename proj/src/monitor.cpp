#include "ssl3d/monitor.hpp"

#include <spdlog/spdlog.h>
#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "ssl3d/error.hpp"
#include "ssl3d/subprocess.hpp"

namespace ssl3d {

void ResourceTrace::append(double t, std::uint64_t mem) {
  if (!samples.empty() && !(t > samples.back().t)) {
    throw InvalidArgument("resource trace times must strictly increase");
  }
  samples.push_back({t, mem});
}

void ResourceTrace::validate() const {
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t > samples[i - 1].t)) {
      throw InvalidArgument("resource trace times must strictly increase");
    }
  }
}

double auc_above_floor(const ResourceTrace& trace, double floor_gb) {
  if (trace.samples.size() < 2) throw InvalidArgument("memory AUC needs at least 2 samples");
  trace.validate();
  double area = 0.0;
  for (std::size_t i = 1; i < trace.samples.size(); ++i) {
    const auto& a = trace.samples[i - 1];
    const auto& b = trace.samples[i];
    const double dt = b.t - a.t;
    const double ga = static_cast<double>(a.mem) / kBytesPerGb - floor_gb;
    const double gb = static_cast<double>(b.mem) / kBytesPerGb - floor_gb;
    if (ga >= 0 && gb >= 0) {
      area += 0.5 * (ga + gb) * dt;
    } else if (ga > 0) {
      area += 0.5 * ga * (dt * ga / (ga - gb));
    } else if (gb > 0) {
      area += 0.5 * gb * (dt * gb / (gb - ga));
    }
  }
  return area;
}

EfficiencyReport efficiency_report(const ResourceTrace& trace, double runtime_s) {
  EfficiencyReport r;
  r.runtime_s = runtime_s;
  r.runtime_over_tolerance_s = std::max(0.0, runtime_s - kRuntimeToleranceS);
  r.mem_auc_gb_s = trace.samples.size() >= 2 ? auc_above_floor(trace) : 0.0;
  std::uint64_t peak = 0;
  for (const auto& s : trace.samples) peak = std::max(peak, s.mem);
  r.peak_mem_gb = static_cast<double>(peak) / kBytesPerGb;
  return r;
}

nlohmann::json to_json(const EfficiencyReport& r) {
  return {{"runtime_s", r.runtime_s},
          {"runtime_over_tolerance_s", r.runtime_over_tolerance_s},
          {"mem_auc_gb_s", r.mem_auc_gb_s},
          {"peak_mem_gb", r.peak_mem_gb}};
}

nlohmann::json to_json(const ResourceTrace& trace) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : trace.samples) samples.push_back({{"t", s.t}, {"mem", s.mem}});
  return {{"period", trace.period}, {"samples", std::move(samples)}};
}

namespace {

std::optional<std::uint64_t> parse_bytes(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return std::nullopt;
  const auto last = text.find_last_not_of(" \t\r\n");
  const char* b = text.data() + first;
  const char* e = text.data() + last + 1;
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e) return std::nullopt;
  return v;
}

// Sum of resident pages over all processes whose group id is `pgid`.
std::uint64_t group_rss_bytes(pid_t pgid) {
  const auto page = static_cast<std::uint64_t>(sysconf(_SC_PAGESIZE));
  std::uint64_t total = 0;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator("/proc", ec)) {
    const auto name = entry.path().filename().string();
    if (name.empty() || !std::all_of(name.begin(), name.end(), ::isdigit)) continue;
    std::ifstream stat(entry.path() / "stat");
    std::string line;
    if (!std::getline(stat, line)) continue;
    // Fields after the parenthesised command name: state ppid pgrp ...
    const auto close = line.rfind(')');
    if (close == std::string::npos) continue;
    std::istringstream rest(line.substr(close + 1));
    char state = 0;
    long ppid = 0, pgrp = 0;
    if (!(rest >> state >> ppid >> pgrp) || pgrp != pgid) continue;
    std::ifstream statm(entry.path() / "statm");
    std::uint64_t size = 0, resident = 0;
    if (statm >> size >> resident) total += resident * page;
  }
  return total;
}

}  // namespace

SampledRun sample_run(const std::string& cmd, const std::string& probe, double period) {
  if (!(period > 0)) throw InvalidArgument("sampling period must be positive");
  using clock = std::chrono::steady_clock;
  SampledRun run;
  run.trace.period = period;

  const auto start = clock::now();
  ChildProcess child(cmd, SpawnOptions{.log_file = std::nullopt, .new_process_group = true});
  auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - start).count(); };
  std::optional<std::uint64_t> last_mem;

  auto take_sample = [&]() {
    std::optional<std::uint64_t> mem;
    if (probe == kRssProbe) {
      mem = group_rss_bytes(child.pid());
    } else {
      const auto out = capture_shell(expand_template(probe, {{"pid", std::to_string(child.pid())}}));
      mem = parse_bytes(out);
      if (!mem) spdlog::warn("probe output '{}' is not a byte count; sample skipped", out);
    }
    const double t = elapsed();
    if (mem && (run.trace.samples.empty() || t > run.trace.samples.back().t)) {
      run.trace.append(t, *mem);
      last_mem = mem;
    }
  };

  auto next = start;
  std::optional<int> status;
  while (!(status = child.try_wait())) {
    take_sample();
    next += std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(period));
    // Short naps so process exit is noticed promptly.
    while (clock::now() < next) {
      if ((status = child.try_wait())) break;
      std::this_thread::sleep_for(std::min<clock::duration>(next - clock::now(), std::chrono::milliseconds(5)));
    }
    if (status) break;
  }
  run.runtime_s = elapsed();
  run.exit_status = *status;
  if (run.exit_status == 127) throw SpawnError("command not found: " + cmd);

  // Final sample at exit. The process is gone, so the built-in probe repeats
  // the last reading; external probes are asked once more.
  if (probe == kRssProbe) {
    if (run.trace.samples.empty() || run.runtime_s > run.trace.samples.back().t) {
      run.trace.append(run.runtime_s, last_mem.value_or(0));
    }
  } else {
    take_sample();
  }
  return run;
}

}  // namespace ssl3d
