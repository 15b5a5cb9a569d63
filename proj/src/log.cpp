#include "featstream/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace featstream {

namespace {

LogLevel from_env() {
    const char* v = std::getenv("FEATSTREAM_LOG");
    if (!v) return LogLevel::Info;
    std::string s(v);
    if (s == "error") return LogLevel::Error;
    if (s == "debug") return LogLevel::Debug;
    return LogLevel::Info;
}

std::atomic<int>& level_slot() {
    static std::atomic<int> level{static_cast<int>(from_env())};
    return level;
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_slot().load()); }

void set_log_level(LogLevel level) { level_slot().store(static_cast<int>(level)); }

void log(LogLevel level, std::string_view msg) {
    if (static_cast<int>(level) > level_slot().load()) return;
    static std::mutex mu;
    static constexpr const char* names[] = {"error", "info", "debug"};
    std::lock_guard lock(mu);
    std::cerr << "featstream: " << names[static_cast<int>(level)] << ": " << msg << '\n';
}

}  // namespace featstream
