#pragma once

#include <cmath>
#include <stdexcept>

#include "nfcsim/apdu.hpp"
#include "nfcsim/errors.hpp"
#include "nfcsim/time.hpp"

namespace nfcsim {

// Cost model for a single command/response exchange. Affine in the payload
// size: a fixed per-exchange overhead plus a bulk term that scales with the
// number of link-layer frames. Defaults reproduce a 329 ms full-chunk
// exchange (150 ms overhead + 179 ms bulk at 2048 bytes).
struct TimingModel {
    Micros apdu_overhead = from_ms(150);
    Micros apdu_bulk_per_chunk = from_ms(179);  // added cost of 2048 payload bytes
    // Share of an exchange spent delivering the command; the remainder is
    // occupied by the response. Must stay below apdu_overhead so the
    // response leg keeps a positive duration at any payload size.
    Micros command_leg = from_ms(75);
    Micros jitter = 0;  // uniform [0, jitter] added per exchange in stochastic runs

    Micros t_apdu(std::size_t payload_bytes) const {
        const double bulk = static_cast<double>(apdu_bulk_per_chunk) *
                            static_cast<double>(payload_bytes) /
                            static_cast<double>(kMaxChunkBytes);
        return apdu_overhead + static_cast<Micros>(std::llround(bulk));
    }
};

// A round trip is one message out and one message back: 2n exchanges joined
// by 2n-1 role switches.
inline double t_round_trip(int n_round_trips, double t_apdu_ms, double t_switching_ms) {
    if (n_round_trips < 1)
        throw std::invalid_argument("round trip count must be at least 1");
    return 2.0 * n_round_trips * t_apdu_ms + (2.0 * n_round_trips - 1.0) * t_switching_ms;
}

// Inverse of the above: recovers the mean switch gap from a measured total.
inline double t_switching_avg(double total_ms, int n_round_trips, double t_apdu_ms) {
    if (n_round_trips < 1)
        throw std::invalid_argument("round trip count must be at least 1");
    const double exchange_time = 2.0 * n_round_trips * t_apdu_ms;
    if (total_ms <= exchange_time)
        throw NonPositiveSwitchTime("total " + std::to_string(total_ms) +
                                    " ms does not exceed exchange time " +
                                    std::to_string(exchange_time) + " ms");
    return (total_ms - exchange_time) / (2.0 * n_round_trips - 1.0);
}

// One-way goodput in kilobits per second.
inline double bandwidth(double payload_bytes, double total_ms) {
    if (total_ms <= 0.0)
        throw std::invalid_argument("total time must be positive");
    return 8.0 * payload_bytes / total_ms;
}

}  // namespace nfcsim
