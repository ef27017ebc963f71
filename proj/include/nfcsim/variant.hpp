#pragma once

#include <string>

#include "nfcsim/errors.hpp"
#include "nfcsim/time.hpp"

namespace nfcsim {

// The four ways two phones can pass the reader role back and forth.
enum class Variant {
    TwoTap,             // user re-taps the devices for every direction change
    HceOneTap,          // single tap, then one switch into reader mode
    DisablingEnabling,  // loser disables first, peer enables after a delay
    EnablingDisabling,  // peer enables first, loser disables shortly after
};

inline const char* variant_name(Variant v) {
    switch (v) {
        case Variant::TwoTap: return "two_tap";
        case Variant::HceOneTap: return "hce_one_tap";
        case Variant::DisablingEnabling: return "disabling_enabling";
        case Variant::EnablingDisabling: return "enabling_disabling";
    }
    return "?";
}

inline Variant variant_from_name(const std::string& s) {
    if (s == "two_tap") return Variant::TwoTap;
    if (s == "hce_one_tap") return Variant::HceOneTap;
    if (s == "disabling_enabling") return Variant::DisablingEnabling;
    if (s == "enabling_disabling") return Variant::EnablingDisabling;
    throw ConfigParse("unknown protocol variant: " + s);
}

struct ProtocolConfig {
    Variant variant = Variant::EnablingDisabling;
    Micros t = from_ms(700);             // disabling-enabling: wait before re-enabling
    Micros t1 = from_ms(310);            // enabling-disabling: response to reader-enable
    Micros t2 = from_ms(100);            // enabling-disabling: receipt to reader-disable
    Micros tap_latency = from_ms(1000);  // injected human tap
};

}  // namespace nfcsim
