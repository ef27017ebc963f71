#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <utility>

#include "nfcsim/errors.hpp"
#include "nfcsim/time.hpp"

namespace nfcsim {

// Discrete event clock. Events fire in (timestamp, insertion order) so that
// simultaneous events resolve deterministically.
class SimClock {
  public:
    using Handle = std::uint64_t;
    using Action = std::function<void()>;

    Micros now() const { return now_; }

    Handle schedule(Micros at, Action fn) {
        if (at < now_)
            throw SchedulingInPast("schedule at " + std::to_string(at) +
                                   " before now " + std::to_string(now_));
        const Handle h = next_handle_++;
        queue_.emplace(Key{at, h}, std::move(fn));
        return h;
    }

    // Removes a pending event. Unknown or already-fired handles are ignored.
    void cancel(Handle h) {
        for (auto it = queue_.begin(); it != queue_.end(); ++it) {
            if (it->first.second == h) {
                queue_.erase(it);
                return;
            }
        }
    }

    bool pending() const { return !queue_.empty(); }

    // Fires the next event. Returns false when the queue is empty.
    bool step() {
        if (queue_.empty()) return false;
        auto it = queue_.begin();
        now_ = it->first.first;
        Action fn = std::move(it->second);
        queue_.erase(it);
        fn();
        return true;
    }

    void run_until_idle() {
        std::uint64_t guard = 0;
        while (step()) {
            if (++guard > kMaxEvents)
                throw std::logic_error("event loop did not terminate");
        }
    }

    // Fires everything scheduled at or before t, then advances the clock to t.
    void advance_to(Micros t) {
        if (t < now_) throw SchedulingInPast("advance_to moves backwards");
        while (!queue_.empty() && queue_.begin()->first.first <= t) step();
        now_ = t;
    }

  private:
    using Key = std::pair<Micros, Handle>;
    static constexpr std::uint64_t kMaxEvents = 500'000'000;

    Micros now_ = 0;
    Handle next_handle_ = 1;
    std::map<Key, Action> queue_;
};

}  // namespace nfcsim
