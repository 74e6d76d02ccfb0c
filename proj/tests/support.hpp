#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sqg/log.hpp"

namespace sqg::test {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(SQG_FIXTURE_DIR) / name;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("sqg-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Collects log messages for the lifetime of the object.
class LogCapture {
 public:
  LogCapture() {
    previous_ = log::set_sink([this](log::Level level, std::string_view msg) {
      messages.emplace_back(msg);
      if (level >= log::Level::warn) warnings.emplace_back(msg);
    });
  }
  ~LogCapture() { log::set_sink(previous_); }

  std::vector<std::string> warnings;
  std::vector<std::string> messages;

 private:
  log::Sink previous_;
};

}  // namespace sqg::test
