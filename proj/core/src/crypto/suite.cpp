#include "imdsec/crypto/suite.hpp"

#include <cstring>

#include "imdsec/crypto/aes128.hpp"

namespace imdsec::crypto {

std::array<std::uint8_t, 16> derive_subkey(const SymmetricKey& key, std::string_view label) {
    return aes_cmac(key.raw, BytesView(reinterpret_cast<const std::uint8_t*>(label.data()),
                                       label.size()));
}

namespace {

std::array<std::uint8_t, 16> tag_over(const std::array<std::uint8_t, 16>& macKey, BytesView ad,
                                      BytesView iv, BytesView ct) {
    ByteWriter w;
    w.u32(static_cast<std::uint32_t>(ad.size()));
    w.raw(ad);
    w.raw(iv);
    w.raw(ct);
    return aes_cmac(macKey, w.bytes());
}

}  // namespace

Bytes aead_encrypt(const SymmetricKey& key, BytesView plaintext, BytesView associatedData,
                   Rng& rng) {
    auto encKey = derive_subkey(key, "imdsec-enc");
    auto macKey = derive_subkey(key, "imdsec-mac");

    std::array<std::uint8_t, kAeadIvBytes> iv{};
    rng.fill(iv.data(), iv.size());

    Bytes ct = aes128_ctr(encKey, iv, plaintext);
    auto tag = tag_over(macKey, associatedData, BytesView(iv.data(), iv.size()),
                        BytesView(ct.data(), ct.size()));

    Bytes out;
    out.reserve(kAeadOverhead + ct.size());
    out.insert(out.end(), iv.begin(), iv.end());
    out.insert(out.end(), ct.begin(), ct.end());
    out.insert(out.end(), tag.begin(), tag.end());
    return out;
}

std::optional<Bytes> aead_decrypt(const SymmetricKey& key, BytesView sealed,
                                  BytesView associatedData) {
    if (sealed.size() < kAeadOverhead) return std::nullopt;
    auto encKey = derive_subkey(key, "imdsec-enc");
    auto macKey = derive_subkey(key, "imdsec-mac");

    BytesView iv = sealed.subspan(0, kAeadIvBytes);
    BytesView ct = sealed.subspan(kAeadIvBytes, sealed.size() - kAeadOverhead);
    BytesView tag = sealed.subspan(sealed.size() - kAeadTagBytes);

    auto expect = tag_over(macKey, associatedData, iv, ct);
    std::uint8_t diff = 0;
    for (std::size_t i = 0; i < kAeadTagBytes; ++i) diff |= expect[i] ^ tag[i];
    if (diff != 0) return std::nullopt;

    std::array<std::uint8_t, 12> ivArr{};
    std::memcpy(ivArr.data(), iv.data(), 12);
    return aes128_ctr(encKey, ivArr, ct);
}

std::array<std::uint8_t, kMacBytes> mac(const SymmetricKey& key, BytesView message) {
    return aes_cmac(key.raw, message);
}

bool mac_verify(const SymmetricKey& key, BytesView message,
                const std::array<std::uint8_t, kMacBytes>& tag) {
    auto expect = mac(key, message);
    std::uint8_t diff = 0;
    for (std::size_t i = 0; i < kMacBytes; ++i) diff |= expect[i] ^ tag[i];
    return diff == 0;
}

Digest256 hash(BytesView data) { return Sha256::digest(data); }

Signature sign(const PrivateKey& priv, BytesView message) { return p192::sign(priv, message); }

bool verify_sig(const PublicKey& pub, BytesView message, const Signature& sig) {
    return p192::verify(pub, message, sig);
}

DhEphemeral dh_generate(Rng& rng) {
    auto seed = rng.bytes(32);
    return DhEphemeral{p192::keypair_from_seed(seed)};
}

std::optional<SymmetricKey> dh_exchange(const DhEphemeral& own, const PublicKey& peerPub,
                                        const Nonce& initiatorNonce, const Nonce& responderNonce,
                                        KeyRole role) {
    auto shared = p192::ecdh(own.keys.priv, peerPub);
    if (!shared) return std::nullopt;

    ByteWriter w;
    w.raw(BytesView(shared->data(), shared->size()));
    w.u32(initiatorNonce.value);
    w.u32(responderNonce.value);
    auto h = Sha256::digest(w.bytes());

    SymmetricKey key;
    std::memcpy(key.raw.data(), h.data(), kKeyBytes);
    key.role = role;
    return key;
}

namespace toy_dh {

namespace {
constexpr std::uint32_t kPrime = 65537;
constexpr std::uint32_t kGenerator = 3;

std::uint32_t pow_mod(std::uint64_t base, std::uint32_t exp) {
    std::uint64_t result = 1, b = base % kPrime;
    while (exp) {
        if (exp & 1) result = result * b % kPrime;
        b = b * b % kPrime;
        exp >>= 1;
    }
    return static_cast<std::uint32_t>(result);
}
}  // namespace

std::uint32_t public_value(std::uint32_t secret) { return pow_mod(kGenerator, secret % (kPrime - 1)); }

std::uint32_t shared_secret(std::uint32_t secret, std::uint32_t peerPublic) {
    return pow_mod(peerPublic, secret % (kPrime - 1));
}

std::optional<std::uint32_t> break_secret(std::uint32_t publicValue) {
    std::uint64_t acc = 1;
    for (std::uint32_t e = 0; e < kPrime - 1; ++e) {
        if (acc == publicValue) return e;
        acc = acc * kGenerator % kPrime;
    }
    return std::nullopt;
}

}  // namespace toy_dh

}  // namespace imdsec::crypto
