#pragma once

#include <string>

#include "json.hpp"

namespace flowkit {

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3, off = 4 };

void set_log_level(LogLevel level);
LogLevel log_level();
LogLevel parse_log_level(const std::string& name);

// One JSON object per event on stderr: {"ts":..., "level":..., "event":..., ...fields}
void log_event(LogLevel level, const std::string& event, nlohmann::ordered_json fields = {});

}  // namespace flowkit
