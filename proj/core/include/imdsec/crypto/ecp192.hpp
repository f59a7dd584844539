#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "imdsec/bytes.hpp"
#include "imdsec/crypto/sha256.hpp"
#include "imdsec/types.hpp"

namespace imdsec::crypto {

/// ECDSA and ECDH over NIST P-192. The 96-bit security level matches the
/// 384-bit signature budget on the wire (r || s, 24 bytes each).
/// Not constant-time; side-channel resistance is out of scope.
namespace p192 {

/// Derive the public key for a private scalar; zero/invalid scalars are rejected.
std::optional<PublicKey> derive_public(const PrivateKey& priv);

/// Deterministic keypair from caller-supplied entropy bytes (>= 24).
KeyPair keypair_from_seed(BytesView seed);

/// Signs the SHA-256 digest of `message`. Deterministic (derived nonce).
Signature sign(const PrivateKey& priv, BytesView message);

/// True iff `sig` is a valid signature on `message` under `pub`.
/// Malformed points or out-of-range scalars simply fail verification.
bool verify(const PublicKey& pub, BytesView message, const Signature& sig);

/// ECDH: shared = priv * peerPub, key = SHA-256(x-coord)[0:16].
/// Fails when the peer value is not a valid curve point.
std::optional<std::array<std::uint8_t, 16>> ecdh(const PrivateKey& priv, const PublicKey& peer);

/// Membership test used by handshake validation.
bool on_curve(const PublicKey& pub);

}  // namespace p192

}  // namespace imdsec::crypto
