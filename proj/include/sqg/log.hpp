#pragma once

#include <functional>
#include <string_view>

namespace sqg::log {

enum class Level { debug, info, warn, error };

using Sink = std::function<void(Level, std::string_view)>;

/// Replaces the process-wide sink and returns the previous one. The default
/// sink writes warnings and errors to stderr.
Sink set_sink(Sink sink);

void write(Level level, std::string_view message);
inline void warn(std::string_view m) { write(Level::warn, m); }
inline void info(std::string_view m) { write(Level::info, m); }

}  // namespace sqg::log
