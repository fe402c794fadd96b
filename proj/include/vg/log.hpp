#pragma once

// Sink for numerical findings that are reported rather than raised, such as
// a computed median falling outside the conjectured bounds.

#include <functional>
#include <string_view>

namespace vg {

using LogSink = std::function<void(std::string_view)>;

// Replaces the process-wide sink; an empty function restores the default,
// which writes one line per finding to std::clog.
void set_log_sink(LogSink sink);

void log_finding(std::string_view message);

}  // namespace vg
