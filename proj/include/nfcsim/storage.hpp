#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nfcsim/apdu.hpp"
#include "nfcsim/errors.hpp"

namespace nfcsim {

using ChunkIndex = int;
using Bytes = std::vector<std::uint8_t>;

constexpr int kMaxChunks = 100;
constexpr std::size_t kMaxMessageBytes = kMaxChunks * kMaxChunkBytes;
constexpr const char* kDefaultAidBase = "F0DATA";

inline void check_chunk_index(ChunkIndex index) {
    if (index < 0 || index >= kMaxChunks)
        throw IndexOutOfRange("chunk index " + std::to_string(index));
}

// Appends the two-digit chunk index to the identifier base.
inline std::string encode_aid(const std::string& base, ChunkIndex index) {
    check_chunk_index(index);
    const std::size_t total = base.size() + 2;
    if (total < kMinAidBytes || total > kMaxAidBytes)
        throw MalformedAid("aid base length " + std::to_string(base.size()));
    std::string aid = base;
    aid.push_back(static_cast<char>('0' + index / 10));
    aid.push_back(static_cast<char>('0' + index % 10));
    return aid;
}

inline ChunkIndex decode_aid(const std::string& aid) {
    if (aid.size() < kMinAidBytes || aid.size() > kMaxAidBytes)
        throw MalformedAid("aid length " + std::to_string(aid.size()));
    const char tens = aid[aid.size() - 2];
    const char ones = aid[aid.size() - 1];
    if (tens < '0' || tens > '9' || ones < '0' || ones > '9')
        throw MalformedAid("aid does not end in two decimal digits");
    return (tens - '0') * 10 + (ones - '0');
}

// Outbox/inbox chunk slots of one device, addressed by chunk index.
class MessageStorage {
  public:
    void set_message_to_send(Bytes payload, ChunkIndex index) {
        set(to_send_, std::move(payload), index);
    }

    const Bytes& get_message_to_send(ChunkIndex index) const {
        return get(to_send_, index, "outgoing");
    }

    void set_message_received(Bytes payload, ChunkIndex index) {
        set(received_, std::move(payload), index);
    }

    const Bytes& get_message_received(ChunkIndex index) const {
        return get(received_, index, "incoming");
    }

    bool has_message_to_send(ChunkIndex index) const {
        return index >= 0 && index < kMaxChunks && to_send_[index].has_value();
    }

    bool has_message_received(ChunkIndex index) const {
        return index >= 0 && index < kMaxChunks && received_[index].has_value();
    }

    void clear() {
        for (auto& s : to_send_) s.reset();
        for (auto& s : received_) s.reset();
    }

  private:
    using Slots = std::array<std::optional<Bytes>, kMaxChunks>;

    static void set(Slots& slots, Bytes payload, ChunkIndex index) {
        check_chunk_index(index);
        if (payload.size() > kMaxChunkBytes)
            throw ChunkTooLarge("chunk of " + std::to_string(payload.size()) + " bytes");
        slots[index] = std::move(payload);
    }

    static const Bytes& get(const Slots& slots, ChunkIndex index, const char* which) {
        check_chunk_index(index);
        const auto& slot = slots[index];
        if (!slot)
            throw EmptySlot(std::string(which) + " slot " + std::to_string(index) +
                            " is empty");
        return *slot;
    }

    Slots to_send_;
    Slots received_;
};

// Splits a message into maximum-size chunks. The empty message still
// occupies one (empty) chunk so that a transfer always moves something.
inline std::vector<Bytes> fragment(const Bytes& message) {
    if (message.size() > kMaxMessageBytes)
        throw MessageTooLarge(std::to_string(message.size()) + " bytes exceeds " +
                              std::to_string(kMaxMessageBytes));
    std::vector<Bytes> chunks;
    if (message.empty()) {
        chunks.emplace_back();
        return chunks;
    }
    for (std::size_t off = 0; off < message.size(); off += kMaxChunkBytes) {
        const std::size_t len = std::min(kMaxChunkBytes, message.size() - off);
        chunks.emplace_back(message.begin() + off, message.begin() + off + len);
    }
    return chunks;
}

inline Bytes assemble(const std::vector<Bytes>& chunks) {
    Bytes out;
    for (const auto& c : chunks) out.insert(out.end(), c.begin(), c.end());
    return out;
}

}  // namespace nfcsim
