#include "imdsec/crypto/cmac.hpp"

#include <cstring>

namespace imdsec::crypto {

namespace {

void left_shift(const std::uint8_t in[16], std::uint8_t out[16]) {
    std::uint8_t carry = 0;
    for (int i = 15; i >= 0; --i) {
        out[i] = static_cast<std::uint8_t>((in[i] << 1) | carry);
        carry = static_cast<std::uint8_t>(in[i] >> 7);
    }
}

}  // namespace

std::array<std::uint8_t, 16> aes_cmac(const std::array<std::uint8_t, 16>& key, BytesView message) {
    Aes128 aes(key);

    // Subkeys K1, K2 from L = AES(0^128).
    std::uint8_t zero[16] = {0};
    std::uint8_t l[16], k1[16], k2[16];
    aes.encrypt_block(zero, l);
    left_shift(l, k1);
    if (l[0] & 0x80) k1[15] ^= 0x87;
    left_shift(k1, k2);
    if (k1[0] & 0x80) k2[15] ^= 0x87;

    std::size_t n = (message.size() + 15) / 16;
    bool complete = n > 0 && message.size() % 16 == 0;
    if (n == 0) n = 1;

    std::uint8_t last[16];
    if (complete) {
        for (int i = 0; i < 16; ++i)
            last[i] = static_cast<std::uint8_t>(message[(n - 1) * 16 + i] ^ k1[i]);
    } else {
        std::uint8_t padded[16] = {0};
        std::size_t rem = message.size() - (n - 1) * 16;
        if (!message.empty()) std::memcpy(padded, message.data() + (n - 1) * 16, rem);
        padded[rem] = 0x80;
        for (int i = 0; i < 16; ++i) last[i] = static_cast<std::uint8_t>(padded[i] ^ k2[i]);
    }

    std::uint8_t x[16] = {0};
    for (std::size_t i = 0; i + 1 < n; ++i) {
        for (int j = 0; j < 16; ++j) x[j] ^= message[i * 16 + j];
        aes.encrypt_block(x, x);
    }
    for (int j = 0; j < 16; ++j) x[j] ^= last[j];
    aes.encrypt_block(x, x);

    std::array<std::uint8_t, 16> out{};
    std::memcpy(out.data(), x, 16);
    return out;
}

}  // namespace imdsec::crypto
