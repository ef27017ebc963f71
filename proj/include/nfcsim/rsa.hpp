#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nfcsim/errors.hpp"
#include "nfcsim/storage.hpp"

namespace nfcsim {

struct RsaPublicKey {
    mpz_class n;
    mpz_class e;
    int bits = 0;
};

struct RsaPrivateKey {
    mpz_class n;
    mpz_class e;
    mpz_class d;
    mpz_class p;
    mpz_class q;
    int bits = 0;
};

struct RsaKeyPair {
    RsaPublicKey pub;
    RsaPrivateKey priv;
};

inline void check_key_length(int bits) {
    if (bits != 512 && bits != 1024 && bits != 2048)
        throw UnsupportedKeyLength(std::to_string(bits) + " bit keys are not supported");
}

namespace rsa_detail {

inline Bytes mpz_to_bytes(const mpz_class& v) {
    if (v == 0) return {};
    Bytes out((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8);
    std::size_t count = 0;
    mpz_export(out.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
    out.resize(count);
    return out;
}

inline Bytes mpz_to_bytes_fixed(const mpz_class& v, std::size_t width) {
    Bytes raw = mpz_to_bytes(v);
    if (raw.size() > width) throw KeyMismatch("value wider than the modulus");
    Bytes out(width - raw.size(), 0);
    out.insert(out.end(), raw.begin(), raw.end());
    return out;
}

inline mpz_class mpz_from_bytes(const std::uint8_t* data, std::size_t len) {
    mpz_class v;
    if (len) mpz_import(v.get_mpz_t(), len, 1, 1, 1, 0, data);
    return v;
}

inline mpz_class mpz_from_bytes(const Bytes& b) { return mpz_from_bytes(b.data(), b.size()); }

}  // namespace rsa_detail

// Deterministic key generation: candidates are drawn from a seeded Mersenne
// Twister, with the top two bits forced so p*q always lands on the exact
// modulus width, and retried until prime. The same seed always yields the
// same key pair.
inline RsaKeyPair rsa_keygen(int bits, std::uint64_t seed) {
    check_key_length(bits);
    gmp_randclass rng(gmp_randinit_default);
    rng.seed(static_cast<unsigned long>(seed));
    const int half = bits / 2;

    auto draw_prime = [&]() {
        for (;;) {
            mpz_class x = rng.get_z_bits(half);
            mpz_setbit(x.get_mpz_t(), half - 1);
            mpz_setbit(x.get_mpz_t(), half - 2);
            mpz_setbit(x.get_mpz_t(), 0);
            if (mpz_probab_prime_p(x.get_mpz_t(), 40)) return x;
        }
    };

    const mpz_class e = 65537;
    for (;;) {
        mpz_class p = draw_prime();
        mpz_class q = draw_prime();
        if (p == q) continue;
        mpz_class n = p * q;
        if (mpz_sizeinbase(n.get_mpz_t(), 2) != static_cast<std::size_t>(bits)) continue;
        const mpz_class phi = (p - 1) * (q - 1);
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), e.get_mpz_t(), phi.get_mpz_t());
        if (g != 1) continue;
        mpz_class d;
        mpz_invert(d.get_mpz_t(), e.get_mpz_t(), phi.get_mpz_t());
        RsaKeyPair kp;
        kp.pub = RsaPublicKey{n, e, bits};
        kp.priv = RsaPrivateKey{n, e, d, p, q, bits};
        return kp;
    }
}

// Block-type-1 padding (00 01 FF.. 00 | message). Deterministic on purpose:
// repeated runs of a benchmark must produce identical bytes. Capacity is
// modulus bytes minus 11.
inline Bytes rsa_encrypt(const RsaPublicKey& pub, const Bytes& plaintext) {
    const std::size_t k = static_cast<std::size_t>(pub.bits) / 8;
    if (plaintext.size() + 11 > k)
        throw PlaintextTooLong(std::to_string(plaintext.size()) + " bytes into a " +
                               std::to_string(pub.bits) + " bit key");
    Bytes block;
    block.reserve(k);
    block.push_back(0x00);
    block.push_back(0x01);
    block.insert(block.end(), k - 3 - plaintext.size(), 0xff);
    block.push_back(0x00);
    block.insert(block.end(), plaintext.begin(), plaintext.end());

    mpz_class m = rsa_detail::mpz_from_bytes(block);
    mpz_class c;
    mpz_powm(c.get_mpz_t(), m.get_mpz_t(), pub.e.get_mpz_t(), pub.n.get_mpz_t());
    return rsa_detail::mpz_to_bytes_fixed(c, k);  // always exactly k bytes
}

inline Bytes rsa_decrypt(const RsaPrivateKey& priv, const Bytes& ciphertext) {
    const std::size_t k = static_cast<std::size_t>(priv.bits) / 8;
    if (ciphertext.size() != k)
        throw KeyMismatch("ciphertext is " + std::to_string(ciphertext.size()) +
                          " bytes, expected " + std::to_string(k));
    mpz_class c = rsa_detail::mpz_from_bytes(ciphertext);
    if (c >= priv.n) throw KeyMismatch("ciphertext exceeds the modulus");
    mpz_class m;
    mpz_powm(m.get_mpz_t(), c.get_mpz_t(), priv.d.get_mpz_t(), priv.n.get_mpz_t());
    const Bytes block = rsa_detail::mpz_to_bytes_fixed(m, k);
    if (block[0] != 0x00 || block[1] != 0x01)
        throw KeyMismatch("padding header mismatch");
    std::size_t i = 2;
    while (i < block.size() && block[i] == 0xff) ++i;
    if (i < 10 || i >= block.size() || block[i] != 0x00)
        throw KeyMismatch("padding structure mismatch");
    return Bytes(block.begin() + static_cast<long>(i) + 1, block.end());
}

// ---- DER encoding (just enough ASN.1 for RSA key interchange) ----

namespace rsa_detail {

inline void der_append_len(Bytes& out, std::size_t len) {
    if (len < 0x80) {
        out.push_back(static_cast<std::uint8_t>(len));
    } else if (len <= 0xff) {
        out.push_back(0x81);
        out.push_back(static_cast<std::uint8_t>(len));
    } else {
        out.push_back(0x82);
        out.push_back(static_cast<std::uint8_t>(len >> 8));
        out.push_back(static_cast<std::uint8_t>(len & 0xff));
    }
}

inline Bytes der_wrap(std::uint8_t tag, const Bytes& body) {
    Bytes out{tag};
    der_append_len(out, body.size());
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

inline Bytes der_integer(const mpz_class& v) {
    Bytes mag = mpz_to_bytes(v);
    if (mag.empty() || (mag[0] & 0x80)) mag.insert(mag.begin(), 0x00);
    return der_wrap(0x02, mag);
}

inline Bytes der_concat(std::initializer_list<Bytes> parts) {
    Bytes out;
    for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

// rsaEncryption OID inside an AlgorithmIdentifier, parameters NULL.
inline const Bytes& rsa_algorithm_identifier() {
    static const Bytes alg = {0x30, 0x0d, 0x06, 0x09, 0x2a, 0x86, 0x48, 0x86,
                              0xf7, 0x0d, 0x01, 0x01, 0x01, 0x05, 0x00};
    return alg;
}

struct DerReader {
    const Bytes& data;
    std::size_t pos = 0;

    std::uint8_t peek() const {
        if (pos >= data.size()) throw MalformedPayload("der: truncated");
        return data[pos];
    }

    std::size_t read_len() {
        std::uint8_t first = next_byte();
        if (first < 0x80) return first;
        const int n = first & 0x7f;
        if (n == 0 || n > 2) throw MalformedPayload("der: unsupported length form");
        std::size_t len = 0;
        for (int i = 0; i < n; ++i) len = (len << 8) | next_byte();
        return len;
    }

    // Enters a constructed element, returning the end offset of its body.
    std::size_t enter(std::uint8_t tag) {
        expect(tag);
        const std::size_t len = read_len();
        if (pos + len > data.size()) throw MalformedPayload("der: body overruns buffer");
        return pos + len;
    }

    mpz_class read_integer() {
        expect(0x02);
        const std::size_t len = read_len();
        if (pos + len > data.size()) throw MalformedPayload("der: integer overruns buffer");
        mpz_class v = mpz_from_bytes(data.data() + pos, len);
        pos += len;
        return v;
    }

    void skip(std::size_t n) {
        if (pos + n > data.size()) throw MalformedPayload("der: skip overruns buffer");
        pos += n;
    }

    void expect(std::uint8_t tag) {
        if (next_byte() != tag) throw MalformedPayload("der: unexpected tag");
    }

    std::uint8_t next_byte() {
        if (pos >= data.size()) throw MalformedPayload("der: truncated");
        return data[pos++];
    }
};

}  // namespace rsa_detail

// SubjectPublicKeyInfo. A 2048-bit key with a 3-byte exponent encodes to
// exactly 294 bytes.
inline Bytes encode_public_key(const RsaPublicKey& pub) {
    using namespace rsa_detail;
    const Bytes rsa_pub =
        der_wrap(0x30, der_concat({der_integer(pub.n), der_integer(pub.e)}));
    Bytes bitstring_body{0x00};  // no unused bits
    bitstring_body.insert(bitstring_body.end(), rsa_pub.begin(), rsa_pub.end());
    return der_wrap(0x30, der_concat({rsa_algorithm_identifier(),
                                      der_wrap(0x03, bitstring_body)}));
}

// PKCS#8 PrivateKeyInfo wrapping the full RSA private key with CRT parts.
inline Bytes encode_private_key(const RsaPrivateKey& priv) {
    using namespace rsa_detail;
    const mpz_class dp = priv.d % (priv.p - 1);
    const mpz_class dq = priv.d % (priv.q - 1);
    mpz_class qinv;
    mpz_invert(qinv.get_mpz_t(), priv.q.get_mpz_t(), priv.p.get_mpz_t());
    const Bytes rsa_priv = der_wrap(
        0x30, der_concat({der_integer(0), der_integer(priv.n), der_integer(priv.e),
                          der_integer(priv.d), der_integer(priv.p), der_integer(priv.q),
                          der_integer(dp), der_integer(dq), der_integer(qinv)}));
    return der_wrap(0x30, der_concat({der_integer(0), rsa_algorithm_identifier(),
                                      der_wrap(0x04, rsa_priv)}));
}

inline RsaPublicKey decode_public_key(const Bytes& der) {
    using namespace rsa_detail;
    DerReader r{der};
    r.enter(0x30);
    const std::size_t alg_end = r.enter(0x30);
    r.skip(alg_end - r.pos);
    r.enter(0x03);
    if (r.next_byte() != 0x00) throw MalformedPayload("der: unused bits in key bitstring");
    r.enter(0x30);
    RsaPublicKey pub;
    pub.n = r.read_integer();
    pub.e = r.read_integer();
    pub.bits = static_cast<int>(mpz_sizeinbase(pub.n.get_mpz_t(), 2));
    return pub;
}

inline RsaPrivateKey decode_private_key(const Bytes& der) {
    using namespace rsa_detail;
    DerReader r{der};
    r.enter(0x30);
    r.read_integer();  // PKCS#8 version
    const std::size_t alg_end = r.enter(0x30);
    r.skip(alg_end - r.pos);
    r.enter(0x04);
    r.enter(0x30);
    RsaPrivateKey priv;
    if (r.read_integer() != 0) throw MalformedPayload("der: unsupported key version");
    priv.n = r.read_integer();
    priv.e = r.read_integer();
    priv.d = r.read_integer();
    priv.p = r.read_integer();
    priv.q = r.read_integer();
    priv.bits = static_cast<int>(mpz_sizeinbase(priv.n.get_mpz_t(), 2));
    return priv;
}

}  // namespace nfcsim
