#pragma once

#include <sys/types.h>

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace asnfuzz {

// Runs "/bin/sh -c command", feeds input on stdin and collects stdout.
// Throws ManglerFailed on spawn failure, non-zero exit or timeout.
std::vector<std::uint8_t> run_filter(const std::string& command,
                                     const std::vector<std::uint8_t>& input,
                                     std::chrono::milliseconds timeout);

// A child process whose stderr is captured line by line.
class ChildProcess {
 public:
  ChildProcess() = default;
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;
  ChildProcess(ChildProcess&& other) noexcept;
  ChildProcess& operator=(ChildProcess&& other) noexcept;
  ~ChildProcess();

  // Throws Error if the program cannot be started.
  static ChildProcess spawn(const std::vector<std::string>& argv);

  bool running() const { return pid_ > 0 && !exit_status_; }
  bool stderr_open() const { return err_fd_ >= 0; }
  pid_t pid() const { return pid_; }

  // Reads whatever stderr output is available within timeout and returns
  // the complete lines seen so far (and since the last call).
  std::vector<std::string> read_lines(std::chrono::milliseconds timeout);

  // Waits up to timeout for the process to exit. Returns true if it exited.
  bool wait_exit(std::chrono::milliseconds timeout);

  // Raw wait status once exited.
  std::optional<int> exit_status() const { return exit_status_; }
  std::string exit_description() const;

  void kill();

 private:
  void poll_exit();

  pid_t pid_ = -1;
  int err_fd_ = -1;
  std::string partial_;
  std::optional<int> exit_status_;
};

}  // namespace asnfuzz
