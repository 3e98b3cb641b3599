#include "flowkit/log.hpp"

#include <chrono>
#include <cstdio>
#include <mutex>

#include "flowkit/errors.hpp"

namespace flowkit {

namespace {
LogLevel g_level = LogLevel::warn;
std::mutex g_mutex;

const char* level_name(LogLevel l) {
    switch (l) {
        case LogLevel::debug: return "debug";
        case LogLevel::info: return "info";
        case LogLevel::warn: return "warn";
        case LogLevel::error: return "error";
        case LogLevel::off: return "off";
    }
    return "?";
}
}  // namespace

void set_log_level(LogLevel level) { g_level = level; }
LogLevel log_level() { return g_level; }

LogLevel parse_log_level(const std::string& name) {
    if (name == "debug") return LogLevel::debug;
    if (name == "info") return LogLevel::info;
    if (name == "warn") return LogLevel::warn;
    if (name == "error") return LogLevel::error;
    if (name == "off") return LogLevel::off;
    throw ValidationError("unknown log level: " + name);
}

void log_event(LogLevel level, const std::string& event, nlohmann::ordered_json fields) {
    if (level < g_level || g_level == LogLevel::off) return;
    nlohmann::ordered_json line;
    auto now = std::chrono::duration_cast<std::chrono::microseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
                   .count();
    line["ts"] = static_cast<double>(now) / 1e6;
    line["level"] = level_name(level);
    line["event"] = event;
    for (auto& [k, v] : fields.items()) line[k] = v;
    std::lock_guard<std::mutex> lock(g_mutex);
    std::fprintf(stderr, "%s\n", line.dump().c_str());
}

}  // namespace flowkit
