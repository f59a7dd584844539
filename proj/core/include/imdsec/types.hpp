#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>

#include "imdsec/bytes.hpp"

namespace imdsec {

// Wire widths shared by the codec and the energy model.
inline constexpr std::size_t kEntityIdBytes = 12;   // 96-bit identifiers
inline constexpr std::size_t kNonceBytes = 4;       // 32-bit nonces
inline constexpr std::size_t kKeyBytes = 16;        // AES-128 key material
inline constexpr std::size_t kCommandBytes = 4;     // 32-bit command word
inline constexpr std::size_t kAnswerBytes = 8;      // 64-bit basic answer
inline constexpr std::size_t kSignatureBytes = 48;  // 384-bit ECDSA signature
inline constexpr std::size_t kMacBytes = 16;
inline constexpr std::size_t kPublicKeyBytes = 48;  // P-192 point, X||Y
inline constexpr std::size_t kPrivateKeyBytes = 24;

/// 96-bit opaque entity identifier.
struct EntityId {
    std::array<std::uint8_t, kEntityIdBytes> raw{};

    auto operator<=>(const EntityId&) const = default;
    bool is_zero() const {
        for (auto b : raw)
            if (b) return false;
        return true;
    }
    std::string hex() const { return to_hex(BytesView(raw.data(), raw.size())); }

    static EntityId from_u64(std::uint64_t v) {
        EntityId id;
        for (int i = 0; i < 8; ++i) id.raw[kEntityIdBytes - 1 - i] = static_cast<std::uint8_t>(v >> (8 * i));
        return id;
    }
};

/// 32-bit nonce with the wrapping increment used in the five-pass reply.
struct Nonce {
    std::uint32_t value = 0;

    auto operator<=>(const Nonce&) const = default;
    Nonce plus(std::uint32_t delta) const { return Nonce{value + delta}; }  // wraps mod 2^32
};

enum class KeyRole : std::uint8_t {
    PresharedServerImplant,  // K_SI
    PresharedServerCard,     // K_SC
    ShortTermReaderCard,     // K'_RC
    ShortTermReaderImplant,  // K'_RI
    ShortTermReaderServer,   // K'_RS
    ServerLink,              // hospital <-> manufacturer links
    ServerSecret,            // K_S, puzzle secret
};

/// 128-bit symmetric key tagged with its protocol role.
struct SymmetricKey {
    std::array<std::uint8_t, kKeyBytes> raw{};
    KeyRole role = KeyRole::ServerSecret;

    bool operator==(const SymmetricKey& o) const { return raw == o.raw; }
    bool is_zero() const {
        for (auto b : raw)
            if (b) return false;
        return true;
    }
};

struct PublicKey {
    std::array<std::uint8_t, kPublicKeyBytes> raw{};
    bool operator==(const PublicKey&) const = default;
};

struct PrivateKey {
    std::array<std::uint8_t, kPrivateKeyBytes> raw{};
    bool operator==(const PrivateKey&) const = default;
};

struct KeyPair {
    PublicKey pub;
    PrivateKey priv;
};

struct Signature {
    std::array<std::uint8_t, kSignatureBytes> raw{};
    bool operator==(const Signature&) const = default;
};

/// Total-ordered access privilege; see requiredPrivilege() for the command map.
enum class Privilege : std::uint8_t {
    ReadOnly = 0,        // patient, nurse, relative
    ReadWrite = 1,       // physician, paramedic
    ReadWriteFirmware = 2,  // technician
};

inline bool operator<(Privilege a, Privilege b) {
    return static_cast<std::uint8_t>(a) < static_cast<std::uint8_t>(b);
}
inline bool operator<=(Privilege a, Privilege b) {
    return static_cast<std::uint8_t>(a) <= static_cast<std::uint8_t>(b);
}

enum class UserRole : std::uint8_t { Patient, Nurse, Relative, Physician, Paramedic, Technician };

inline Privilege privilege_for_role(UserRole role) {
    switch (role) {
        case UserRole::Patient:
        case UserRole::Nurse:
        case UserRole::Relative:
            return Privilege::ReadOnly;
        case UserRole::Physician:
        case UserRole::Paramedic:
            return Privilege::ReadWrite;
        case UserRole::Technician:
            return Privilege::ReadWriteFirmware;
    }
    return Privilege::ReadOnly;
}

enum class EntityClass : std::uint8_t { Server = 0, Reader = 1, Card = 2 };

/// CA-signed binding of an identity, its privileges and its public key.
/// Card certificates always carry a privilege level; reader and server
/// certificates carry Privilege::ReadOnly as a placeholder byte.
struct Certificate {
    EntityId subject{};
    EntityClass subjectClass = EntityClass::Reader;
    Privilege privileges = Privilege::ReadOnly;
    PublicKey publicKey{};
    Signature signature{};

    bool operator==(const Certificate&) const = default;

    /// Byte string the CA signs.
    Bytes signed_payload() const {
        ByteWriter w;
        w.raw(BytesView(subject.raw.data(), subject.raw.size()));
        w.u8(static_cast<std::uint8_t>(subjectClass));
        w.u8(static_cast<std::uint8_t>(privileges));
        w.raw(BytesView(publicKey.raw.data(), publicKey.raw.size()));
        return w.take();
    }

    Bytes encode() const {
        ByteWriter w;
        w.raw(BytesView(subject.raw.data(), subject.raw.size()));
        w.u8(static_cast<std::uint8_t>(subjectClass));
        w.u8(static_cast<std::uint8_t>(privileges));
        w.raw(BytesView(publicKey.raw.data(), publicKey.raw.size()));
        w.raw(BytesView(signature.raw.data(), signature.raw.size()));
        return w.take();
    }

    static constexpr std::size_t kEncodedSize =
        kEntityIdBytes + 2 + kPublicKeyBytes + kSignatureBytes;

    static std::optional<Certificate> decode(BytesView data);
};

enum class CommandKind : std::uint8_t {
    ReadStatus = 0,
    WriteTherapy = 1,
    Suspend = 2,
    Resume = 3,
    FirmwareUpdate = 4,
    Finish = 5,
};

/// 32-bit command word: kind byte plus a 24-bit argument.
struct Command {
    CommandKind kind = CommandKind::ReadStatus;
    std::uint32_t payload = 0;  // low 24 bits are encoded

    bool operator==(const Command&) const = default;

    std::uint32_t word() const {
        return (std::uint32_t(static_cast<std::uint8_t>(kind)) << 24) | (payload & 0xffffff);
    }
    static std::optional<Command> from_word(std::uint32_t w) {
        auto k = static_cast<std::uint8_t>(w >> 24);
        if (k > static_cast<std::uint8_t>(CommandKind::Finish)) return std::nullopt;
        return Command{static_cast<CommandKind>(k), w & 0xffffff};
    }
};

inline Privilege required_privilege(CommandKind kind) {
    switch (kind) {
        case CommandKind::ReadStatus:
        case CommandKind::Finish:
            return Privilege::ReadOnly;
        case CommandKind::WriteTherapy:
        case CommandKind::Suspend:
        case CommandKind::Resume:
            return Privilege::ReadWrite;
        case CommandKind::FirmwareUpdate:
            return Privilege::ReadWriteFirmware;
    }
    return Privilege::ReadWriteFirmware;
}

/// Write-class commands leave a non-repudiation record in implant flash;
/// read-only commands do not.
inline bool is_write_command(CommandKind kind) {
    return required_privilege(kind) > Privilege::ReadOnly;
}

inline std::optional<Certificate> Certificate::decode(BytesView data) {
    if (data.size() != kEncodedSize) return std::nullopt;
    ByteReader r(data);
    Certificate c;
    c.subject.raw = r.arr<kEntityIdBytes>();
    auto cls = r.u8();
    auto priv = r.u8();
    if (cls > 2 || priv > 2) return std::nullopt;
    c.subjectClass = static_cast<EntityClass>(cls);
    c.privileges = static_cast<Privilege>(priv);
    c.publicKey.raw = r.arr<kPublicKeyBytes>();
    c.signature.raw = r.arr<kSignatureBytes>();
    return c;
}

}  // namespace imdsec
