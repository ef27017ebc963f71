#pragma once

#include <cstdint>

namespace nfcsim {

// Simulated time is kept in integer microseconds so traces and totals are
// exact and reproducible across platforms.
using Micros = std::int64_t;

constexpr Micros from_ms(std::int64_t ms) { return ms * 1000; }
constexpr double to_ms(Micros us) { return static_cast<double>(us) / 1000.0; }

}  // namespace nfcsim
