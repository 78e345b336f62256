#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace redukt {

// The environment failed, not the compiler command: spawn errors, command
// not found, timeouts. Never conflated with an ordinary pass/fail exit.
struct InfraError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunResult {
  int exit_code = 0;
  std::string output;  // stderr first, then stdout
  double seconds = 0.0;
};

using FileSet = std::vector<std::pair<std::string, std::string>>;  // (relative path, text)

namespace detail {

class Pipe {
 public:
  Pipe() {
    if (pipe(fd_) != 0) throw InfraError("pipe() failed");
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  int read_fd() const { return fd_[0]; }
  int write_fd() const { return fd_[1]; }
  void close_read() {
    if (fd_[0] >= 0) ::close(fd_[0]);
    fd_[0] = -1;
  }
  void close_write() {
    if (fd_[1] >= 0) ::close(fd_[1]);
    fd_[1] = -1;
  }

 private:
  int fd_[2] = {-1, -1};
};

inline void drain(int fd, std::string& into) {
  char buf[4096];
  while (true) {
    ssize_t n = ::read(fd, buf, sizeof buf);
    if (n > 0)
      into.append(buf, static_cast<std::size_t>(n));
    else
      return;
  }
}

}  // namespace detail

// Run `command` through /bin/sh -c with a hard wall-clock timeout, capturing
// stderr and stdout separately (concatenated stderr-first in the result).
// Exit codes 126/127 from the shell mean the command could not be run at all
// and raise InfraError, as does the timeout (the whole process group is
// killed).
inline RunResult run_command(const std::string& command, double timeout_seconds) {
  detail::Pipe out_pipe, err_pipe;
  const auto start = std::chrono::steady_clock::now();

  pid_t pid = fork();
  if (pid < 0) throw InfraError("fork() failed: " + std::string(strerror(errno)));
  if (pid == 0) {
    setpgid(0, 0);
    dup2(out_pipe.write_fd(), STDOUT_FILENO);
    dup2(err_pipe.write_fd(), STDERR_FILENO);
    out_pipe.close_read();
    out_pipe.close_write();
    err_pipe.close_read();
    err_pipe.close_write();
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);  // also from the parent, to close the race
  out_pipe.close_write();
  err_pipe.close_write();

  std::string out_text, err_text;
  bool out_open = true, err_open = true;
  bool timed_out = false;
  const auto deadline = start + std::chrono::duration<double>(timeout_seconds);

  while (out_open || err_open) {
    struct pollfd fds[2];
    nfds_t nfds = 0;
    if (out_open) fds[nfds++] = {out_pipe.read_fd(), POLLIN, 0};
    if (err_open) fds[nfds++] = {err_pipe.read_fd(), POLLIN, 0};

    auto now = std::chrono::steady_clock::now();
    long remaining_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    if (remaining_ms <= 0) {
      timed_out = true;
      break;
    }
    int rc = ::poll(fds, nfds, static_cast<int>(std::min(remaining_ms, 60000L)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      kill(-pid, SIGKILL);
      waitpid(pid, nullptr, 0);
      throw InfraError("poll() failed: " + std::string(strerror(errno)));
    }
    if (rc == 0) continue;  // re-check the deadline
    for (nfds_t i = 0; i < nfds; ++i) {
      if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      char buf[4096];
      ssize_t n = ::read(fds[i].fd, buf, sizeof buf);
      bool is_out = fds[i].fd == out_pipe.read_fd();
      if (n > 0) {
        (is_out ? out_text : err_text).append(buf, static_cast<std::size_t>(n));
      } else {
        (is_out ? out_open : err_open) = false;
      }
    }
  }

  if (timed_out) {
    kill(-pid, SIGKILL);
    waitpid(pid, nullptr, 0);
    throw InfraError("command timed out after " + std::to_string(timeout_seconds) +
                     "s: " + command);
  }

  // pipes are closed; collect the exit status
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw InfraError("waitpid() failed");
  }
  detail::drain(out_pipe.read_fd(), out_text);
  detail::drain(err_pipe.read_fd(), err_text);

  RunResult result;
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  } else {
    result.exit_code = WEXITSTATUS(status);
  }
  result.output = err_text + out_text;
  if (result.exit_code == 127 || result.exit_code == 126)
    throw InfraError("command could not be executed (exit " +
                     std::to_string(result.exit_code) + "): " + command +
                     (result.output.empty() ? "" : "\n" + result.output));
  return result;
}

/// Root directory for candidate staging: $REDUKT_TMPDIR if set, else the
// system temp directory.
inline std::filesystem::path stage_root() {
  if (const char* env = std::getenv("REDUKT_TMPDIR"); env && *env) return env;
  return std::filesystem::temp_directory_path();
}

namespace detail {

struct StageDir {
  std::filesystem::path path;
  explicit StageDir(const std::filesystem::path& root) {
    std::filesystem::create_directories(root);
    std::string tmpl = (root / "redukt-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (!mkdtemp(buf.data())) throw InfraError("mkdtemp failed in " + root.string());
    path = buf.data();
  }
  ~StageDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  StageDir(const StageDir&) = delete;
  StageDir& operator=(const StageDir&) = delete;
};

inline std::string shell_quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) {
    if (c == '\'')
      q += "'\\''";
    else
      q.push_back(c);
  }
  q.push_back('\'');
  return q;
}

}  // namespace detail

// Materialize the candidate files in a fresh staging directory (relative
// paths preserved), substitute the space-joined quoted paths for the
// `{files}` placeholder, run, and clean up. The file order in `files` is the
// substitution order.
inline RunResult run_compiler(const FileSet& files, const std::string& command_template,
                              double timeout_seconds,
                              const std::filesystem::path& tmp_root = stage_root()) {
  detail::StageDir stage(tmp_root);
  std::string joined;
  for (const auto& [rel, text] : files) {
    std::filesystem::path p = stage.path / rel;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw InfraError("cannot write staged file " + p.string());
    f << text;
    f.close();
    if (!joined.empty()) joined.push_back(' ');
    joined += detail::shell_quote(p.string());
  }
  std::string command = command_template;
  const std::string placeholder = "{files}";
  for (std::size_t at = command.find(placeholder); at != std::string::npos;
       at = command.find(placeholder, at + joined.size()))
    command.replace(at, placeholder.size(), joined);
  return run_command(command, timeout_seconds);
}

}  // namespace redukt
