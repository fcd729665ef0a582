#include "asnfuzz/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "asnfuzz/errors.hpp"

extern char** environ;

namespace asnfuzz {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe() {
  static const bool done = [] {
    struct sigaction sa {};
    sa.sa_handler = SIG_IGN;
    sigaction(SIGPIPE, &sa, nullptr);
    return true;
  }();
  (void)done;
}

int remaining_ms(Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(left.count());
}

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (pipe2(fd, O_CLOEXEC) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
  }
  ~Pipe() {
    for (int f : fd) {
      if (f >= 0) close(f);
    }
  }
  int release(int i) {
    int f = fd[i];
    fd[i] = -1;
    return f;
  }
};

pid_t spawn_with(const std::vector<std::string>& argv,
                 posix_spawn_file_actions_t* actions) {
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  pid_t pid;
  int rc = posix_spawnp(&pid, args[0], actions, nullptr, args.data(), environ);
  if (rc != 0) throw Error("cannot start '" + argv[0] + "': " + std::strerror(rc));
  return pid;
}

}  // namespace

std::vector<std::uint8_t> run_filter(const std::string& command,
                                     const std::vector<std::uint8_t>& input,
                                     std::chrono::milliseconds timeout) {
  ignore_sigpipe();
  Pipe in, out;
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in.fd[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out.fd[1], STDOUT_FILENO);
  pid_t pid;
  try {
    pid = spawn_with({"/bin/sh", "-c", command}, &actions);
  } catch (const Error& e) {
    posix_spawn_file_actions_destroy(&actions);
    throw ManglerFailed(e.what());
  }
  posix_spawn_file_actions_destroy(&actions);
  close(in.release(0));
  close(out.release(1));
  int wfd = in.release(1);
  int rfd = out.release(0);
  fcntl(wfd, F_SETFL, O_NONBLOCK);
  fcntl(rfd, F_SETFL, O_NONBLOCK);

  const auto deadline = Clock::now() + timeout;
  std::vector<std::uint8_t> result;
  std::size_t written = 0;
  if (input.empty()) {
    close(wfd);
    wfd = -1;
  }
  bool timed_out = false;
  while (rfd >= 0) {
    pollfd fds[2];
    int n = 0;
    fds[n++] = {rfd, POLLIN, 0};
    if (wfd >= 0) fds[n++] = {wfd, POLLOUT, 0};
    int ready = poll(fds, n, remaining_ms(deadline));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) {
      timed_out = true;
      break;
    }
    if (wfd >= 0 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t w = write(wfd, input.data() + written, input.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN) written = input.size();
      if (written == input.size()) {
        close(wfd);
        wfd = -1;
      }
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      std::uint8_t buf[4096];
      ssize_t r = read(rfd, buf, sizeof buf);
      if (r > 0) {
        result.insert(result.end(), buf, buf + r);
      } else if (r == 0 || errno != EAGAIN) {
        close(rfd);
        rfd = -1;
      }
    }
  }
  if (wfd >= 0) close(wfd);
  if (rfd >= 0) close(rfd);
  int status = 0;
  if (timed_out) {
    ::kill(pid, SIGKILL);
    waitpid(pid, &status, 0);
    throw ManglerFailed("external mangler timed out");
  }
  // Output is complete; give the process the rest of the budget to exit.
  while (true) {
    pid_t w = waitpid(pid, &status, WNOHANG);
    if (w == pid) break;
    if (Clock::now() >= deadline) {
      ::kill(pid, SIGKILL);
      waitpid(pid, &status, 0);
      throw ManglerFailed("external mangler timed out");
    }
    usleep(1000);
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw ManglerFailed("external mangler failed with status " + std::to_string(status));
  }
  return result;
}

ChildProcess::ChildProcess(ChildProcess&& other) noexcept { *this = std::move(other); }

ChildProcess& ChildProcess::operator=(ChildProcess&& other) noexcept {
  if (this != &other) {
    kill();
    pid_ = std::exchange(other.pid_, -1);
    err_fd_ = std::exchange(other.err_fd_, -1);
    partial_ = std::move(other.partial_);
    exit_status_ = std::exchange(other.exit_status_, std::nullopt);
  }
  return *this;
}

ChildProcess::~ChildProcess() { kill(); }

ChildProcess ChildProcess::spawn(const std::vector<std::string>& argv) {
  ignore_sigpipe();
  Pipe err;
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, err.fd[1], STDERR_FILENO);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  ChildProcess c;
  try {
    c.pid_ = spawn_with(argv, &actions);
  } catch (...) {
    posix_spawn_file_actions_destroy(&actions);
    throw;
  }
  posix_spawn_file_actions_destroy(&actions);
  c.err_fd_ = err.release(0);
  fcntl(c.err_fd_, F_SETFL, O_NONBLOCK);
  return c;
}

std::vector<std::string> ChildProcess::read_lines(std::chrono::milliseconds timeout) {
  std::vector<std::string> lines;
  const auto deadline = Clock::now() + timeout;
  while (err_fd_ >= 0) {
    pollfd p{err_fd_, POLLIN, 0};
    int ready = poll(&p, 1, remaining_ms(deadline));
    if (ready < 0 && errno == EINTR) continue;
    if (ready <= 0) break;
    char buf[4096];
    ssize_t r = read(err_fd_, buf, sizeof buf);
    if (r > 0) {
      partial_.append(buf, static_cast<std::size_t>(r));
    } else if (r == 0 || errno != EAGAIN) {
      close(err_fd_);
      err_fd_ = -1;
    }
    std::size_t nl;
    bool got = false;
    while ((nl = partial_.find('\n')) != std::string::npos) {
      lines.push_back(partial_.substr(0, nl));
      partial_.erase(0, nl + 1);
      got = true;
    }
    if (got) break;
  }
  if (err_fd_ < 0 && !partial_.empty()) {
    lines.push_back(std::move(partial_));
    partial_.clear();
  }
  return lines;
}

void ChildProcess::poll_exit() {
  if (pid_ <= 0 || exit_status_) return;
  int status;
  if (waitpid(pid_, &status, WNOHANG) == pid_) exit_status_ = status;
}

bool ChildProcess::wait_exit(std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  while (true) {
    poll_exit();
    if (exit_status_ || pid_ <= 0) return true;
    if (Clock::now() >= deadline) return false;
    usleep(1000);
  }
}

std::string ChildProcess::exit_description() const {
  if (!exit_status_) return "running";
  int s = *exit_status_;
  if (WIFSIGNALED(s)) return "exit: signal " + std::to_string(WTERMSIG(s));
  return "exit: code " + std::to_string(WEXITSTATUS(s));
}

void ChildProcess::kill() {
  if (pid_ > 0 && !exit_status_) {
    ::kill(pid_, SIGKILL);
    int status;
    waitpid(pid_, &status, 0);
    exit_status_ = status;
  }
  if (err_fd_ >= 0) {
    close(err_fd_);
    err_fd_ = -1;
  }
}

}  // namespace asnfuzz
