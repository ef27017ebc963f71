#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nfcsim/errors.hpp"
#include "nfcsim/storage.hpp"
#include "nfcsim/time.hpp"

namespace nfcsim {

constexpr int kMaxQueens = 16;

// Number of ways to place n non-attacking queens on an n x n board.
// Bitmask backtracking over columns and the two diagonal directions.
inline std::uint64_t nqueens_count(int n) {
    if (n < 1) throw std::invalid_argument("board size must be at least 1");
    if (n > kMaxQueens)
        throw SizeTooLarge("board size " + std::to_string(n) + " exceeds " +
                           std::to_string(kMaxQueens));
    const std::uint32_t full = (1u << n) - 1u;
    struct Rec {
        std::uint32_t full;
        std::uint64_t operator()(std::uint32_t cols, std::uint32_t ld,
                                 std::uint32_t rd) const {
            if (cols == full) return 1;
            std::uint64_t count = 0;
            std::uint32_t open = full & ~(cols | ld | rd);
            while (open) {
                const std::uint32_t bit = open & (0u - open);
                open ^= bit;
                count += (*this)(cols | bit, (ld | bit) << 1, (rd | bit) >> 1);
            }
            return count;
        }
    };
    return Rec{full}(0, 0, 0);
}

// Single-core solver cost on the baseline device (speed factor 1.0), in
// microseconds. Scaled from wall-clock measurements of the solver above,
// anchored at 112 ms for the 11-queens board.
inline Micros nqueens_base_cost(int n) {
    if (n < 1) throw std::invalid_argument("board size must be at least 1");
    if (n > kMaxQueens)
        throw SizeTooLarge("board size " + std::to_string(n) + " exceeds " +
                           std::to_string(kMaxQueens));
    static constexpr Micros table[kMaxQueens + 1] = {
        0,          // unused
        1,          // 1
        1,          // 2
        2,          // 3
        25,         // 4
        30,         // 5
        100,        // 6
        360,        // 7
        1360,       // 8
        4910,       // 9
        20900,      // 10
        112000,     // 11
        553200,     // 12
        3121400,    // 13
        20673000,   // 14
        116140000,  // 15
        777490000,  // 16
    };
    return table[n];
}

// Key generation dominates; grows roughly with the cube of the modulus size.
inline Micros rsa_base_cost(int key_bits) {
    switch (key_bits) {
        case 512: return 62500;
        case 1024: return 500000;
        case 2048: return 4000000;
        default:
            throw UnsupportedKeyLength(std::to_string(key_bits));
    }
}

// Request payload for a board-count task: application number, then the
// board size, one byte each.
inline Bytes serialize_nqueens(std::uint8_t application_number, int n) {
    if (n < 1 || n > 255) throw std::invalid_argument("board size byte out of range");
    return Bytes{application_number, static_cast<std::uint8_t>(n)};
}

inline std::pair<std::uint8_t, int> deserialize_nqueens(const Bytes& payload) {
    if (payload.size() != 2)
        throw MalformedPayload("expected 2 bytes, got " + std::to_string(payload.size()));
    return {payload[0], static_cast<int>(payload[1])};
}

// Result payload: application number, then the solution count, big endian.
inline Bytes serialize_nqueens_result(std::uint8_t application_number, std::uint64_t count) {
    Bytes out(9);
    out[0] = application_number;
    for (int i = 0; i < 8; ++i)
        out[1 + i] = static_cast<std::uint8_t>(count >> (8 * (7 - i)));
    return out;
}

inline std::pair<std::uint8_t, std::uint64_t> deserialize_nqueens_result(const Bytes& payload) {
    if (payload.size() != 9)
        throw MalformedPayload("expected 9 bytes, got " + std::to_string(payload.size()));
    std::uint64_t count = 0;
    for (int i = 0; i < 8; ++i) count = (count << 8) | payload[1 + i];
    return {payload[0], count};
}

struct RsaResultFraming {
    Bytes ciphertext;
    Bytes public_key_der;
    Bytes private_key_der;
};

// The ciphertext and the public key travel together in the first chunk; the
// private key fills the second. Two consecutive reads, no switch between.
inline std::vector<Bytes> frame_rsa_result(const Bytes& ciphertext, const Bytes& public_key_der,
                                           const Bytes& private_key_der) {
    Bytes chunk0 = ciphertext;
    chunk0.insert(chunk0.end(), public_key_der.begin(), public_key_der.end());
    if (chunk0.size() > kMaxChunkBytes)
        throw ChunkTooLarge("ciphertext plus public key is " +
                            std::to_string(chunk0.size()) + " bytes");
    if (private_key_der.size() > kMaxChunkBytes)
        throw ChunkTooLarge("private key is " + std::to_string(private_key_der.size()) +
                            " bytes");
    return {std::move(chunk0), private_key_der};
}

// key_bits fixes the ciphertext length, which locates the split inside the
// first chunk.
inline RsaResultFraming unframe_rsa_result(const std::vector<Bytes>& chunks, int key_bits) {
    if (chunks.size() != 2)
        throw MalformedPayload("expected 2 chunks, got " + std::to_string(chunks.size()));
    const std::size_t ct_len = static_cast<std::size_t>(key_bits) / 8;
    if (chunks[0].size() < ct_len)
        throw MalformedPayload("first chunk shorter than the ciphertext");
    RsaResultFraming f;
    f.ciphertext.assign(chunks[0].begin(), chunks[0].begin() + static_cast<long>(ct_len));
    f.public_key_der.assign(chunks[0].begin() + static_cast<long>(ct_len), chunks[0].end());
    f.private_key_der = chunks[1];
    return f;
}

}  // namespace nfcsim
