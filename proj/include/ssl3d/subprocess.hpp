#pragma once

#include <sys/types.h>

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "ssl3d/error.hpp"

namespace ssl3d {

class SpawnError : public Error {
 public:
  using Error::Error;
};

/// Single-quotes `s` for /bin/sh.
std::string shell_quote(const std::string& s);

/// Replaces each `{key}` with the shell-quoted value. Unknown placeholders are
/// left alone.
std::string expand_template(const std::string& tmpl, const std::map<std::string, std::string>& values);

struct SpawnOptions {
  std::optional<std::filesystem::path> log_file;  // stdout and stderr appended here
  bool new_process_group = false;
};

/// A `/bin/sh -c` child. Waits for the child on destruction if still running.
class ChildProcess {
 public:
  ChildProcess(const std::string& command, const SpawnOptions& options = {});
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;
  ChildProcess(ChildProcess&& other) noexcept;
  ChildProcess& operator=(ChildProcess&&) = delete;
  ~ChildProcess();

  pid_t pid() const { return pid_; }
  /// Exit code, or 128 + signal number when killed by a signal.
  int wait();
  std::optional<int> try_wait();

 private:
  pid_t pid_ = -1;
  std::optional<int> status_;
};

int run_shell(const std::string& command, const SpawnOptions& options = {});

/// Runs `command` and returns its standard output.
std::string capture_shell(const std::string& command, int* exit_code = nullptr);

}  // namespace ssl3d
