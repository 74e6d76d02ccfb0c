#include "sqg/log.hpp"

#include <iostream>
#include <mutex>

#include "sqg/error.hpp"

namespace sqg {

namespace {

std::string summarize(const std::vector<RecordFailure>& failures) {
  std::string msg = std::to_string(failures.size()) + " record(s) failed";
  if (!failures.empty()) {
    msg += "; first at line " + std::to_string(failures.front().line) + ": " +
           failures.front().message;
  }
  return msg;
}

}  // namespace

IngestError::IngestError(std::vector<RecordFailure> failures)
    : Error(summarize(failures)), failures_(std::move(failures)) {}

namespace log {

namespace {

std::mutex& sink_mutex() {
  static std::mutex m;
  return m;
}

Sink& current_sink() {
  static Sink sink = [](Level level, std::string_view message) {
    if (level < Level::warn) return;
    std::cerr << (level == Level::warn ? "warning: " : "error: ") << message << '\n';
  };
  return sink;
}

}  // namespace

Sink set_sink(Sink sink) {
  std::lock_guard lock(sink_mutex());
  auto prev = std::move(current_sink());
  current_sink() = std::move(sink);
  return prev;
}

void write(Level level, std::string_view message) {
  std::lock_guard lock(sink_mutex());
  if (current_sink()) current_sink()(level, message);
}

}  // namespace log
}  // namespace sqg
