#pragma once

#include <string_view>

namespace featstream {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

/// Initialised from FEATSTREAM_LOG (error, info, debug); defaults to info.
LogLevel log_level();
void set_log_level(LogLevel level);

/// Writes "featstream: <level>: <msg>" to stderr if `level` is enabled.
void log(LogLevel level, std::string_view msg);

inline void log_error(std::string_view msg) { log(LogLevel::Error, msg); }
inline void log_info(std::string_view msg) { log(LogLevel::Info, msg); }
inline void log_debug(std::string_view msg) { log(LogLevel::Debug, msg); }

}  // namespace featstream
