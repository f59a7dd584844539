#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "imdsec/bytes.hpp"
#include "imdsec/crypto/cmac.hpp"
#include "imdsec/crypto/ecp192.hpp"
#include "imdsec/crypto/sha256.hpp"
#include "imdsec/rng.hpp"
#include "imdsec/types.hpp"

namespace imdsec::crypto {

/// Selects an energy/delay cost row; all classes are functionally identical.
enum class ImplClass : std::uint8_t {
    HardwareAccelerated = 0,
    SoftwareAes = 1,
    SoftwareSpeck = 2,
    SoftwareMisty1 = 3,
};

inline const char* impl_class_name(ImplClass c) {
    switch (c) {
        case ImplClass::HardwareAccelerated: return "hw-aes";
        case ImplClass::SoftwareAes: return "sw-aes";
        case ImplClass::SoftwareSpeck: return "sw-speck";
        case ImplClass::SoftwareMisty1: return "sw-misty1";
    }
    return "?";
}

inline std::optional<ImplClass> impl_class_from_name(std::string_view name) {
    if (name == "hw-aes" || name == "hw") return ImplClass::HardwareAccelerated;
    if (name == "sw-aes" || name == "sw") return ImplClass::SoftwareAes;
    if (name == "sw-speck") return ImplClass::SoftwareSpeck;
    if (name == "sw-misty1") return ImplClass::SoftwareMisty1;
    return std::nullopt;
}

inline constexpr std::size_t kAeadIvBytes = 12;
inline constexpr std::size_t kAeadTagBytes = 16;
inline constexpr std::size_t kAeadOverhead = kAeadIvBytes + kAeadTagBytes;

/// Encrypt-then-MAC ciphertext layout: iv(12) || ct(n) || tag(16).
/// Encryption and MAC subkeys are derived from the session key with
/// distinct CMAC labels, per the separate-keys requirement.
Bytes aead_encrypt(const SymmetricKey& key, BytesView plaintext, BytesView associatedData,
                   Rng& rng);

/// Returns the plaintext, or nullopt on any authentication failure.
/// Never yields garbage plaintext: the tag is checked before decryption.
std::optional<Bytes> aead_decrypt(const SymmetricKey& key, BytesView sealed,
                                  BytesView associatedData);

/// 128-bit CMAC tag under the raw key.
std::array<std::uint8_t, kMacBytes> mac(const SymmetricKey& key, BytesView message);

bool mac_verify(const SymmetricKey& key, BytesView message,
                const std::array<std::uint8_t, kMacBytes>& tag);

/// Suite hash; n = 256 bits (the CPP puzzle difficulty k truncates it).
Digest256 hash(BytesView data);

/// Exposed for the EtM-discipline property test.
std::array<std::uint8_t, 16> derive_subkey(const SymmetricKey& key, std::string_view label);

Signature sign(const PrivateKey& priv, BytesView message);
bool verify_sig(const PublicKey& pub, BytesView message, const Signature& sig);

/// Certificate-authenticated ephemeral ECDH over P-192.
struct DhEphemeral {
    KeyPair keys;
};

DhEphemeral dh_generate(Rng& rng);

/// Both sides call this with their ephemeral private key and the peer's
/// ephemeral public value; transcript binds the two handshake nonces.
std::optional<SymmetricKey> dh_exchange(const DhEphemeral& own, const PublicKey& peerPub,
                                        const Nonce& initiatorNonce, const Nonce& responderNonce,
                                        KeyRole role);

/// Toy 16-bit DH group (multiplicative mod 65537). Exists only so tests can
/// demonstrate that a brute-force oracle recovers keys when the group is
/// small; the protocol itself always runs on P-192.
namespace toy_dh {
std::uint32_t public_value(std::uint32_t secret);
std::uint32_t shared_secret(std::uint32_t secret, std::uint32_t peerPublic);
/// Brute-force discrete log; the demonstration oracle.
std::optional<std::uint32_t> break_secret(std::uint32_t publicValue);
}  // namespace toy_dh

}  // namespace imdsec::crypto
