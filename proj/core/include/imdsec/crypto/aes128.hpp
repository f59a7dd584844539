#pragma once

#include <array>
#include <cstdint>

#include "imdsec/bytes.hpp"

namespace imdsec::crypto {

using Block = std::array<std::uint8_t, 16>;

/// AES-128 block cipher (encrypt direction only; CTR and CMAC never decrypt).
class Aes128 {
public:
    explicit Aes128(const std::array<std::uint8_t, 16>& key) { expand_key(key); }

    void encrypt_block(const std::uint8_t in[16], std::uint8_t out[16]) const;
    Block encrypt_block(const Block& in) const {
        Block out{};
        encrypt_block(in.data(), out.data());
        return out;
    }

private:
    void expand_key(const std::array<std::uint8_t, 16>& key);

    std::array<std::uint8_t, 176> roundKeys_{};
};

/// AES-128-CTR keystream XOR; encrypt and decrypt are the same operation.
/// The 16-byte counter block is iv(12) || big-endian counter(4).
Bytes aes128_ctr(const std::array<std::uint8_t, 16>& key,
                 const std::array<std::uint8_t, 12>& iv, BytesView data);

}  // namespace imdsec::crypto
