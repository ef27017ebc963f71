#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <vector>

#include "nfcsim/errors.hpp"

namespace nfcsim {

constexpr std::size_t kMaxChunkBytes = 2048;
constexpr std::size_t kMinAidBytes = 5;
constexpr std::size_t kMaxAidBytes = 16;

constexpr std::array<std::uint8_t, 4> kSelectHeader{0x00, 0xA4, 0x04, 0x00};
constexpr std::array<std::uint8_t, 2> kStatusOk{0x90, 0x00};
// "File or application not found": returned by a card that has nothing
// stored under the selected identifier.
constexpr std::array<std::uint8_t, 2> kStatusNotFound{0x6A, 0x82};

// SELECT-style command: fixed 4-byte header plus an application identifier
// whose last two characters are ASCII decimal digits naming a chunk index.
struct ApduCommand {
    std::array<std::uint8_t, 4> header = kSelectHeader;
    std::string aid;

    ApduCommand() = default;
    explicit ApduCommand(std::string aid_in) : aid(std::move(aid_in)) { validate(); }

    void validate() const {
        if (aid.size() < kMinAidBytes || aid.size() > kMaxAidBytes)
            throw MalformedAid("aid length " + std::to_string(aid.size()));
        const unsigned char tens = aid[aid.size() - 2];
        const unsigned char ones = aid[aid.size() - 1];
        if (!std::isdigit(tens) || !std::isdigit(ones))
            throw MalformedAid("aid does not end in two decimal digits");
    }
};

struct ApduResponse {
    std::vector<std::uint8_t> payload;
    std::array<std::uint8_t, 2> status = kStatusOk;

    ApduResponse() = default;
    explicit ApduResponse(std::vector<std::uint8_t> payload_in,
                          std::array<std::uint8_t, 2> status_in = kStatusOk)
        : payload(std::move(payload_in)), status(status_in) {
        if (payload.size() > kMaxChunkBytes)
            throw ChunkTooLarge("response payload " + std::to_string(payload.size()) +
                                " exceeds " + std::to_string(kMaxChunkBytes));
    }

    bool ok() const { return status == kStatusOk; }
};

}  // namespace nfcsim
