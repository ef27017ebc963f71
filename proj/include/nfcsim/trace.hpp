#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include "nfcsim/time.hpp"

namespace nfcsim {

struct TraceEvent {
    Micros at = 0;
    std::string device;
    std::string kind;
    std::string detail;
};

// Append-only event log. One line per event, tab separated, so runs can be
// diffed byte for byte.
class TraceLog {
  public:
    bool enabled = true;

    void record(Micros at, std::string device, std::string kind,
                std::string detail = {}) {
        if (!enabled) return;
        events_.push_back({at, std::move(device), std::move(kind), std::move(detail)});
    }

    const std::vector<TraceEvent>& events() const { return events_; }

    void clear() { events_.clear(); }

    std::string render() const {
        std::string out;
        char buf[32];
        for (const auto& e : events_) {
            std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(e.at));
            out += buf;
            out += '\t';
            out += e.device;
            out += '\t';
            out += e.kind;
            out += '\t';
            out += e.detail;
            out += '\n';
        }
        return out;
    }

  private:
    std::vector<TraceEvent> events_;
};

}  // namespace nfcsim
