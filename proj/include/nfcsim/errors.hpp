#pragma once

#include <stdexcept>
#include <string>

namespace nfcsim {

// Base class for everything the simulator can throw on purpose.
struct SimError : std::runtime_error {
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

// Event scheduling / link layer.
struct SchedulingInPast : SimError { using SimError::SimError; };
struct NoCardInField : SimError { using SimError::SimError; };
struct TagLost : SimError { using SimError::SimError; };
struct Busy : SimError { using SimError::SimError; };
struct AlreadyLost : SimError { using SimError::SimError; };

// APDU / chunk plumbing.
struct ChunkTooLarge : SimError { using SimError::SimError; };
struct IndexOutOfRange : SimError { using SimError::SimError; };
struct EmptySlot : SimError { using SimError::SimError; };
struct MessageTooLarge : SimError { using SimError::SimError; };
struct MalformedAid : SimError { using SimError::SimError; };
struct CorruptResponse : SimError { using SimError::SimError; };

// Protocol runners / timing algebra.
struct UnsupportedByVariant : SimError { using SimError::SimError; };
struct NonPositiveSwitchTime : SimError { using SimError::SimError; };
struct OverlappingIntervals : SimError { using SimError::SimError; };

// Workloads.
struct SizeTooLarge : SimError { using SimError::SimError; };
struct MalformedPayload : SimError { using SimError::SimError; };
struct UnsupportedKeyLength : SimError { using SimError::SimError; };
struct PlaintextTooLong : SimError { using SimError::SimError; };
struct KeyMismatch : SimError { using SimError::SimError; };

// Configuration / CLI.
struct ConfigParse : SimError { using SimError::SimError; };
struct UnknownWorkload : SimError { using SimError::SimError; };

}  // namespace nfcsim
