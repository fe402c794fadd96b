#include "vg/log.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace vg {

namespace {

std::mutex& sink_mutex() {
    static std::mutex m;
    return m;
}

LogSink& sink_slot() {
    static LogSink sink;
    return sink;
}

}  // namespace

void set_log_sink(LogSink sink) {
    std::lock_guard lock(sink_mutex());
    sink_slot() = std::move(sink);
}

void log_finding(std::string_view message) {
    std::lock_guard lock(sink_mutex());
    if (sink_slot()) {
        sink_slot()(message);
    } else {
        std::clog << "vg: " << message << '\n';
    }
}

}  // namespace vg
