#pragma once

#include <sys/types.h>

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sde::detail {

using Clock = std::chrono::steady_clock;

struct SpawnOptions {
  std::filesystem::path working_dir;
  std::optional<int> memory_cap_mb;
};

struct ExitStatus {
  bool exited = false;    // normal exit
  int code = 0;           // exit code, or signal number when !exited
};

/// Child process with piped stdin/stdout; stderr goes to /dev/null. The
/// child leads its own process group so a kill reaches grandchildren too.
/// Destruction kills and reaps.
class Subprocess {
 public:
  /// nullopt when fork or exec fails.
  static std::optional<Subprocess> spawn(const std::vector<std::string>& argv, const SpawnOptions& opts);

  Subprocess(Subprocess&& other) noexcept;
  Subprocess& operator=(Subprocess&& other) noexcept;
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;
  ~Subprocess();

  enum class IoResult { Ok, Timeout, Closed };

  /// Writes all of `data` unless the deadline passes or the pipe closes.
  IoResult write_all(std::string_view data, Clock::time_point deadline);

  /// Reads one '\n'-terminated line (terminator stripped).
  IoResult read_line(std::string& line, Clock::time_point deadline);

  /// Feeds `input`, closes stdin and collects stdout until EOF.
  IoResult communicate(std::string_view input, std::string& output, Clock::time_point deadline,
                       std::size_t max_output = 64u << 20);

  void close_stdin();
  void kill();
  /// Blocks until exit. Safe to call after kill().
  ExitStatus wait();
  /// Waits up to `grace`, then kills.
  ExitStatus wait_or_kill(std::chrono::milliseconds grace);

 private:
  Subprocess() = default;
  void reset();

  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  std::optional<ExitStatus> status_;
};

/// mkdtemp-backed scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

void ignore_sigpipe();

}  // namespace sde::detail
