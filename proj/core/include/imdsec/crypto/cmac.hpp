#pragma once

#include <array>

#include "imdsec/bytes.hpp"
#include "imdsec/crypto/aes128.hpp"

namespace imdsec::crypto {

/// AES-CMAC (RFC 4493), full 16-byte tag.
std::array<std::uint8_t, 16> aes_cmac(const std::array<std::uint8_t, 16>& key, BytesView message);

}  // namespace imdsec::crypto
