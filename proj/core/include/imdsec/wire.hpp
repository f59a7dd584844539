#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "imdsec/bytes.hpp"
#include "imdsec/types.hpp"

namespace imdsec::wire {

/// Frame layout: tag(1) || length(2, big-endian byte count of body) || body.
/// Body fields are fixed-width big-endian in declared order, no padding.
/// Variable fields (cryptograms, bitstrings) carry a u16 length prefix.
inline constexpr std::size_t kFrameHeaderBytes = 3;

enum class MsgType : std::uint8_t {
    ReaderHello = 0x01,
    PuzzleChallenge = 0x02,
    PuzzleResponse = 0x03,
    ServerHello = 0x04,
    DhInit = 0x05,
    DhResponse = 0x06,
    Reject = 0x07,

    CardAuthInit = 0x10,
    CardAuthReply = 0x11,
    TokenRequest = 0x12,
    TokenResponse = 0x13,
    CardConfirm = 0x14,
    CardConfirmReply = 0x15,

    PinVerify = 0x20,
    PinReply = 0x21,

    SessionInit = 0x30,
    SessionHello = 0x31,
    KeyRequest = 0x32,
    KeyResponse = 0x33,
    KeyConfirm = 0x34,
    KeyConfirmReply = 0x35,
    AuthFail = 0x36,

    CommandToCard = 0x40,
    CommandSignature = 0x41,
    CommandToImplant = 0x42,
    CommandAnswer = 0x43,
    BedsideCommand = 0x44,
    BedsideAnswer = 0x45,
    BedsideReady = 0x46,

    OobAccessRequest = 0x50,
    OobKeyTransfer = 0x51,
    OfflineConfirm = 0x52,
    OfflineConfirmReply = 0x53,

    RemoteKeyRequest = 0x60,
    RemoteKeyForward = 0x61,
    RemoteKeyReply = 0x62,
    RemoteFail = 0x63,
};

const char* msg_type_name(MsgType t);

/// Rejection reasons carried on the wire (server/implant -> reader).
enum class RejectReason : std::uint8_t {
    CertInvalid = 1,
    CertRevoked = 2,
    PuzzleWrongSolution = 3,
    PuzzleExpired = 4,
    CardUnknown = 5,
    CardRevoked = 6,
    NonceMismatch = 7,
    MacFailure = 8,
    CryptogramInvalid = 9,
    CryptogramReused = 10,
    ImplantUnknown = 11,
    ServerLinkFailure = 12,
    Busy = 13,
    GroupElementInvalid = 14,
    PrivilegeViolation = 15,
    SessionExpired = 16,
    PolicyViolation = 17,
};

inline constexpr std::uint8_t kMaxRejectReason = 17;

const char* reject_reason_name(RejectReason r);

using MacTag = std::array<std::uint8_t, kMacBytes>;

// ---- phase 0: connection, client puzzle, DH handshake -----------------

struct ReaderHello {
    EntityId readerId{};
    Nonce readerNonce{};
};

/// x = hash(ID_R || t || K_S); the challenge ships h(x), x minus its first
/// k bits, and t. k is implied by 256 - partialBits but carried explicitly.
struct PuzzleChallenge {
    std::array<std::uint8_t, 32> digestOfX{};  // h(x)
    std::uint8_t difficulty = 0;               // k
    Bytes partialX;                            // x<k+1 : n>, packed MSB-first
    std::uint64_t timestampMs = 0;             // t
};

struct PuzzleResponse {
    EntityId readerId{};
    std::uint64_t timestampMs = 0;
    std::uint8_t difficulty = 0;
    Bytes solution;  // x<1 : k>, packed MSB-first
};

struct ServerHello {
    EntityId serverId{};
    Nonce serverNonce{};
};

struct DhInit {
    Bytes certificate;       // CA-signed reader certificate
    PublicKey ephemeral{};   // fresh P-192 point
    Signature bindingSig{};  // over ephemeral || N_R || N_S, under the reader key
};

struct DhResponse {
    Bytes certificate;
    PublicKey ephemeral{};
    Signature bindingSig{};  // over ephemeral || N_S || N_R, under the server key
};

struct Reject {
    RejectReason reason = RejectReason::MacFailure;
};

// ---- phase I: reader-card mutual authentication (five-pass) ------------

struct CardAuthInit {
    EntityId readerId{};
    Nonce readerNonce{};
    Nonce serverNonce{};
};

struct CardAuthReply {
    EntityId cardId{};
    Nonce cardNonce{};
    Bytes mSc1;  // {Cert_C, ID_R, N_R, N_S, N_C}_K_SC
};

struct TokenRequest {
    EntityId readerId{};
    EntityId cardId{};
    Nonce cardNonce{};
    Bytes mSc1;
};

struct TokenResponse {
    Bytes tokenReader;  // {K'_RC, N_R, N_C, ID_R, ID_C, P_C, T_L}_K'_RS
    Bytes tokenCard;    // {K'_RC, N_R, N_C, ID_R, ID_C}_K_SC
};

struct CardConfirm {
    MacTag mac{};  // MAC_{K'_RC}(N_R || N_C)
    Bytes tokenCard;
};

struct CardConfirmReply {
    MacTag mac{};  // MAC_{K'_RC}(N_R+1 || N_C+1)
};

// ---- phase II: user authentication --------------------------------------

struct PinVerify {
    Bytes cryptogram;  // {PIN, N_R, N_C}_K'_RC
};

enum class PinStatus : std::uint8_t { Ok = 0, Mismatch = 1, Locked = 2, NonceError = 3 };

struct PinReply {
    Bytes cryptogram;  // {status, N_R, N_C}_K'_RC
    Bytes mSc2;        // {pin-ok, N_C, N_S}_K_SC; empty unless status == Ok
};

// ---- phase III: session-key establishment -------------------------------

struct SessionInit {
    EntityId readerId{};
    Nonce readerNonce{};
};

struct SessionHello {
    EntityId implantId{};
    Nonce implantNonce{};
};

enum class AccessMode : std::uint8_t { OnlineCard = 0, Bedside = 1, Offline = 2 };

struct KeyRequest {
    EntityId readerId{};
    EntityId cardId{};  // zero id in bedside mode
    EntityId implantId{};
    Nonce readerNonce{};
    Nonce implantNonce{};
    std::uint8_t bedside = 0;
    Bytes mSc2;  // empty in bedside mode
};

struct KeyResponse {
    Bytes mReader;   // {K'_RI, N_R, N_I, ID_I, P_granted}_K'_RS
    Bytes mImplant;  // {K'_RI, N_R, N_I, ID_R, ID_C, N_C, P_granted, mode}_K_SI
};

struct KeyConfirm {
    Bytes mImplant;
    Bytes mRi;  // {N_R, N_I}_K'_RI
};

struct KeyConfirmReply {
    MacTag mac{};  // MAC_{K'_RI}(N_I || N_R)
};

/// Authenticated failure notice so a rejected establishment is
/// distinguishable from silence; MAC_{K_SI}(N_R || 'F').
struct AuthFail {
    MacTag mac{};
};

// ---- phase IV: main phase ------------------------------------------------

struct CommandToCard {
    Bytes cryptogram;  // {CMD, N_R+r, N_C+r}_K'_RC
};

struct CommandSignature {
    Signature sig{};  // sig_{K_prC}(CMD || N_R+r || N_C+r)
};

enum class CommandAuthKind : std::uint8_t { None = 0, CardSignature = 1, ServerMac = 2 };

struct CommandToImplant {
    Bytes cryptogram;  // {CMD, N_R+r, N_I+r}_K'_RI
    CommandAuthKind authKind = CommandAuthKind::None;
    Bytes auth;  // 48-byte sig, 16-byte server MAC, or empty
};

struct CommandAnswer {
    std::uint32_t chunkIndex = 0;
    std::uint32_t chunkCount = 1;
    Bytes cryptogram;  // {ANS-chunk, N_I+r, N_R+r}_K'_RI, chunk header as AD
};

// ---- bedside relay -------------------------------------------------------

struct BedsideReady {
    Bytes cryptogram;  // {ID_I, N_R, N_I}_K'_RS
};

struct BedsideCommand {
    Bytes cryptogram;  // {CMD, N_R+r, N_I+r, MAC_K_SI(CMD||N_R+r||N_I+r)}_K'_RS
};

struct BedsideAnswer {
    std::uint32_t chunkIndex = 0;
    std::uint32_t chunkCount = 1;
    Bytes cryptogram;  // {ANS-chunk}_K'_RS
};

// ---- offline (OOB) -------------------------------------------------------

struct OobAccessRequest {
    EntityId readerId{};
};

struct OobKeyTransfer {
    EntityId implantId{};
    Nonce implantNonce{};
    SymmetricKey sessionKey{};  // plaintext is acceptable only on the touch channel
};

struct OfflineConfirm {
    Nonce readerNonce{};
    EntityId cardId{};    // zero when the deployment waives non-repudiation
    Nonce cardNonce{};    // phase-I card nonce; record linkage for audits
    MacTag mac{};         // MAC_{K'_RI}(N_R || N_I || ID_C || N_C)
};

struct OfflineConfirmReply {
    MacTag mac{};  // MAC_{K'_RI}(N_I+1 || N_R+1)
};

// ---- remote-hospital extension -------------------------------------------

struct RemoteKeyRequest {
    EntityId implantId{};
    Bytes payload;  // {K'_RI, N_R, N_I, ID_R, ID_C, N_C, P}_K_link
};

struct RemoteKeyForward {
    EntityId implantId{};
    EntityId originServerId{};
    Bytes payload;
};

struct RemoteKeyReply {
    EntityId implantId{};
    Bytes mImplant;
};

struct RemoteFail {
    RejectReason reason = RejectReason::ImplantUnknown;
};

using Message = std::variant<
    ReaderHello, PuzzleChallenge, PuzzleResponse, ServerHello, DhInit, DhResponse, Reject,
    CardAuthInit, CardAuthReply, TokenRequest, TokenResponse, CardConfirm, CardConfirmReply,
    PinVerify, PinReply, SessionInit, SessionHello, KeyRequest, KeyResponse, KeyConfirm,
    KeyConfirmReply, AuthFail, CommandToCard, CommandSignature, CommandToImplant, CommandAnswer,
    BedsideCommand, BedsideAnswer, BedsideReady, OobAccessRequest, OobKeyTransfer, OfflineConfirm,
    OfflineConfirmReply, RemoteKeyRequest, RemoteKeyForward, RemoteKeyReply, RemoteFail>;

MsgType msg_type(const Message& m);

enum class DecodeError : std::uint8_t {
    UnknownTag,
    Truncated,      // body shorter than the declared length
    TrailingBytes,  // bytes beyond the declared length
    BadField,       // body length right, contents inconsistent
};

const char* decode_error_name(DecodeError e);

struct DecodeResult {
    std::optional<Message> message;
    DecodeError error = DecodeError::BadField;

    bool ok() const { return message.has_value(); }
};

/// Deterministic byte sequence: tag || length || body.
/// Throws std::invalid_argument when a field exceeds its declared width.
Bytes encode_frame(const Message& m);

/// Exact inverse of encode_frame on valid inputs; the error distinguishes
/// unknown tag, truncation, trailing bytes and inconsistent fields.
DecodeResult decode_frame(BytesView bytes);

}  // namespace imdsec::wire
