#include "process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <system_error>
#include <thread>

namespace sde::detail {
namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

void set_nonblocking(int fd) { ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK); }

int remaining_ms(Clock::time_point deadline) {
  const auto left = deadline - Clock::now();
  if (left <= Clock::duration::zero()) return 0;
  const auto ms = std::chrono::ceil<std::chrono::milliseconds>(left).count();
  return ms > INT32_MAX ? INT32_MAX : static_cast<int>(ms);
}

}  // namespace

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

std::optional<Subprocess> Subprocess::spawn(const std::vector<std::string>& argv, const SpawnOptions& opts) {
  if (argv.empty()) return std::nullopt;
  ignore_sigpipe();

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) return std::nullopt;
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    return std::nullopt;
  }
  if (::pipe2(err_pipe, O_CLOEXEC) != 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1]}) ::close(fd);
    return std::nullopt;
  }

  // Everything the child touches is prepared before fork().
  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);
  const std::string workdir = opts.working_dir.string();
  rlimit mem{};
  if (opts.memory_cap_mb) {
    mem.rlim_cur = mem.rlim_max = static_cast<rlim_t>(*opts.memory_cap_mb) * 1024 * 1024;
  }

  const pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) ::close(fd);
    return std::nullopt;
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(in_pipe[0], 0);
    ::dup2(out_pipe[1], 1);
    const int devnull = ::open("/dev/null", O_WRONLY);
    if (devnull >= 0) ::dup2(devnull, 2);
    if (opts.memory_cap_mb) ::setrlimit(RLIMIT_AS, &mem);
    if (!workdir.empty() && ::chdir(workdir.c_str()) != 0) {
      const int e = errno;
      (void)!::write(err_pipe[1], &e, sizeof e);
      ::_exit(127);
    }
    ::execvp(cargv[0], cargv.data());
    const int e = errno;
    (void)!::write(err_pipe[1], &e, sizeof e);
    ::_exit(127);
  }

  ::setpgid(pid, pid);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);

  int child_errno = 0;
  ssize_t n;
  do {
    n = ::read(err_pipe[0], &child_errno, sizeof child_errno);
  } while (n < 0 && errno == EINTR);
  ::close(err_pipe[0]);

  Subprocess proc;
  proc.pid_ = pid;
  proc.in_fd_ = in_pipe[1];
  proc.out_fd_ = out_pipe[0];
  if (n == static_cast<ssize_t>(sizeof child_errno)) {
    proc.wait();
    return std::nullopt;
  }
  set_nonblocking(proc.in_fd_);
  set_nonblocking(proc.out_fd_);
  return proc;
}

Subprocess::Subprocess(Subprocess&& other) noexcept { *this = std::move(other); }

Subprocess& Subprocess::operator=(Subprocess&& other) noexcept {
  if (this != &other) {
    reset();
    pid_ = std::exchange(other.pid_, -1);
    in_fd_ = std::exchange(other.in_fd_, -1);
    out_fd_ = std::exchange(other.out_fd_, -1);
    buffer_ = std::move(other.buffer_);
    status_ = std::exchange(other.status_, std::nullopt);
  }
  return *this;
}

Subprocess::~Subprocess() { reset(); }

void Subprocess::reset() {
  if (pid_ > 0 && !status_) {
    kill();
    wait();
  }
  close_fd(in_fd_);
  close_fd(out_fd_);
  pid_ = -1;
}

Subprocess::IoResult Subprocess::write_all(std::string_view data, Clock::time_point deadline) {
  while (!data.empty()) {
    if (in_fd_ < 0) return IoResult::Closed;
    const ssize_t n = ::write(in_fd_, data.data(), data.size());
    if (n > 0) {
      data.remove_prefix(static_cast<std::size_t>(n));
      continue;
    }
    if (n < 0 && errno == EINTR) continue;
    if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK) return IoResult::Closed;
    pollfd p{in_fd_, POLLOUT, 0};
    const int ms = remaining_ms(deadline);
    if (ms == 0) return IoResult::Timeout;
    const int r = ::poll(&p, 1, ms);
    if (r == 0) return IoResult::Timeout;
    if (r > 0 && (p.revents & (POLLERR | POLLHUP)) && !(p.revents & POLLOUT)) return IoResult::Closed;
  }
  return IoResult::Ok;
}

Subprocess::IoResult Subprocess::read_line(std::string& line, Clock::time_point deadline) {
  char chunk[4096];
  while (true) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      line.assign(buffer_, 0, nl);
      buffer_.erase(0, nl + 1);
      return IoResult::Ok;
    }
    if (out_fd_ < 0) return IoResult::Closed;
    const ssize_t n = ::read(out_fd_, chunk, sizeof chunk);
    if (n > 0) {
      buffer_.append(chunk, static_cast<std::size_t>(n));
      continue;
    }
    if (n == 0) return IoResult::Closed;
    if (errno == EINTR) continue;
    if (errno != EAGAIN && errno != EWOULDBLOCK) return IoResult::Closed;
    const int ms = remaining_ms(deadline);
    if (ms == 0) return IoResult::Timeout;
    pollfd p{out_fd_, POLLIN, 0};
    if (::poll(&p, 1, ms) == 0 && Clock::now() >= deadline) return IoResult::Timeout;
  }
}

Subprocess::IoResult Subprocess::communicate(std::string_view input, std::string& output,
                                             Clock::time_point deadline, std::size_t max_output) {
  char chunk[8192];
  if (input.empty()) close_stdin();
  while (true) {
    pollfd fds[2];
    nfds_t count = 0;
    if (out_fd_ >= 0) fds[count++] = {out_fd_, POLLIN, 0};
    if (in_fd_ >= 0) fds[count++] = {in_fd_, POLLOUT, 0};
    if (out_fd_ < 0) return IoResult::Ok;
    const int ms = remaining_ms(deadline);
    if (ms == 0) return IoResult::Timeout;
    const int r = ::poll(fds, count, ms);
    if (r < 0 && errno == EINTR) continue;
    if (r == 0) {
      if (Clock::now() >= deadline) return IoResult::Timeout;
      continue;
    }
    for (nfds_t i = 0; i < count; ++i) {
      if (fds[i].fd == in_fd_ && fds[i].revents) {
        const ssize_t n = ::write(in_fd_, input.data(), input.size());
        if (n > 0) input.remove_prefix(static_cast<std::size_t>(n));
        if ((n < 0 && errno != EAGAIN && errno != EINTR) || input.empty()) close_stdin();
      } else if (fds[i].fd == out_fd_ && fds[i].revents) {
        const ssize_t n = ::read(out_fd_, chunk, sizeof chunk);
        if (n > 0) {
          output.append(chunk, static_cast<std::size_t>(n));
          if (output.size() > max_output) return IoResult::Closed;
        } else if (n == 0 || (errno != EAGAIN && errno != EINTR)) {
          close_fd(out_fd_);
        }
      }
    }
  }
}

void Subprocess::close_stdin() { close_fd(in_fd_); }

void Subprocess::kill() {
  if (pid_ > 0 && !status_) {
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
  }
}

ExitStatus Subprocess::wait() {
  if (status_) return *status_;
  if (pid_ <= 0) return {};
  int st = 0;
  while (::waitpid(pid_, &st, 0) < 0 && errno == EINTR) {
  }
  ExitStatus s;
  if (WIFEXITED(st)) {
    s.exited = true;
    s.code = WEXITSTATUS(st);
  } else if (WIFSIGNALED(st)) {
    s.code = WTERMSIG(st);
  }
  // reap anything the child left behind in its group
  ::kill(-pid_, SIGKILL);
  status_ = s;
  return s;
}

ExitStatus Subprocess::wait_or_kill(std::chrono::milliseconds grace) {
  if (status_) return *status_;
  const auto deadline = Clock::now() + grace;
  while (Clock::now() < deadline) {
    int st = 0;
    const pid_t r = ::waitpid(pid_, &st, WNOHANG);
    if (r == pid_) {
      ExitStatus s;
      if (WIFEXITED(st)) {
        s.exited = true;
        s.code = WEXITSTATUS(st);
      } else if (WIFSIGNALED(st)) {
        s.code = WTERMSIG(st);
      }
      ::kill(-pid_, SIGKILL);
      status_ = s;
      return s;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  kill();
  return wait();
}

TempDir::TempDir() {
  std::string templ = (std::filesystem::temp_directory_path() / "sde-XXXXXX").string();
  if (::mkdtemp(templ.data()) == nullptr) {
    throw std::system_error(errno, std::generic_category(), "mkdtemp");
  }
  path_ = templ;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace sde::detail
