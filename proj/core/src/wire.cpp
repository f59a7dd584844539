#include "imdsec/wire.hpp"

#include <stdexcept>

namespace imdsec::wire {

namespace {

void put_id(ByteWriter& w, const EntityId& id) { w.raw(BytesView(id.raw.data(), id.raw.size())); }
void put_nonce(ByteWriter& w, const Nonce& n) { w.u32(n.value); }
void put_mac(ByteWriter& w, const MacTag& m) { w.raw(BytesView(m.data(), m.size())); }
void put_sig(ByteWriter& w, const Signature& s) { w.raw(BytesView(s.raw.data(), s.raw.size())); }
void put_pub(ByteWriter& w, const PublicKey& p) { w.raw(BytesView(p.raw.data(), p.raw.size())); }

EntityId get_id(ByteReader& r) {
    EntityId id;
    id.raw = r.arr<kEntityIdBytes>();
    return id;
}
Nonce get_nonce(ByteReader& r) { return Nonce{r.u32()}; }
MacTag get_mac(ByteReader& r) { return r.arr<kMacBytes>(); }
Signature get_sig(ByteReader& r) {
    Signature s;
    s.raw = r.arr<kSignatureBytes>();
    return s;
}
PublicKey get_pub(ByteReader& r) {
    PublicKey p;
    p.raw = r.arr<kPublicKeyBytes>();
    return p;
}

// ---- per-message body codecs ------------------------------------------

void body(ByteWriter& w, const ReaderHello& m) {
    put_id(w, m.readerId);
    put_nonce(w, m.readerNonce);
}
bool body(ByteReader& r, ReaderHello& m) {
    m.readerId = get_id(r);
    m.readerNonce = get_nonce(r);
    return true;
}

void body(ByteWriter& w, const PuzzleChallenge& m) {
    w.raw(BytesView(m.digestOfX.data(), m.digestOfX.size()));
    w.u8(m.difficulty);
    w.var(BytesView(m.partialX.data(), m.partialX.size()));
    w.u64(m.timestampMs);
}
bool body(ByteReader& r, PuzzleChallenge& m) {
    m.digestOfX = r.arr<32>();
    m.difficulty = r.u8();
    m.partialX = r.var();
    m.timestampMs = r.u64();
    return true;
}

void body(ByteWriter& w, const PuzzleResponse& m) {
    put_id(w, m.readerId);
    w.u64(m.timestampMs);
    w.u8(m.difficulty);
    w.var(BytesView(m.solution.data(), m.solution.size()));
}
bool body(ByteReader& r, PuzzleResponse& m) {
    m.readerId = get_id(r);
    m.timestampMs = r.u64();
    m.difficulty = r.u8();
    m.solution = r.var();
    return true;
}

void body(ByteWriter& w, const ServerHello& m) {
    put_id(w, m.serverId);
    put_nonce(w, m.serverNonce);
}
bool body(ByteReader& r, ServerHello& m) {
    m.serverId = get_id(r);
    m.serverNonce = get_nonce(r);
    return true;
}

void body(ByteWriter& w, const DhInit& m) {
    w.var(BytesView(m.certificate.data(), m.certificate.size()));
    put_pub(w, m.ephemeral);
    put_sig(w, m.bindingSig);
}
bool body(ByteReader& r, DhInit& m) {
    m.certificate = r.var();
    m.ephemeral = get_pub(r);
    m.bindingSig = get_sig(r);
    return true;
}

void body(ByteWriter& w, const DhResponse& m) {
    w.var(BytesView(m.certificate.data(), m.certificate.size()));
    put_pub(w, m.ephemeral);
    put_sig(w, m.bindingSig);
}
bool body(ByteReader& r, DhResponse& m) {
    m.certificate = r.var();
    m.ephemeral = get_pub(r);
    m.bindingSig = get_sig(r);
    return true;
}

void body(ByteWriter& w, const Reject& m) { w.u8(static_cast<std::uint8_t>(m.reason)); }
bool body(ByteReader& r, Reject& m) {
    auto v = r.u8();
    if (v < 1 || v > kMaxRejectReason) return false;
    m.reason = static_cast<RejectReason>(v);
    return true;
}

void body(ByteWriter& w, const CardAuthInit& m) {
    put_id(w, m.readerId);
    put_nonce(w, m.readerNonce);
    put_nonce(w, m.serverNonce);
}
bool body(ByteReader& r, CardAuthInit& m) {
    m.readerId = get_id(r);
    m.readerNonce = get_nonce(r);
    m.serverNonce = get_nonce(r);
    return true;
}

void body(ByteWriter& w, const CardAuthReply& m) {
    put_id(w, m.cardId);
    put_nonce(w, m.cardNonce);
    w.var(BytesView(m.mSc1.data(), m.mSc1.size()));
}
bool body(ByteReader& r, CardAuthReply& m) {
    m.cardId = get_id(r);
    m.cardNonce = get_nonce(r);
    m.mSc1 = r.var();
    return true;
}

void body(ByteWriter& w, const TokenRequest& m) {
    put_id(w, m.readerId);
    put_id(w, m.cardId);
    put_nonce(w, m.cardNonce);
    w.var(BytesView(m.mSc1.data(), m.mSc1.size()));
}
bool body(ByteReader& r, TokenRequest& m) {
    m.readerId = get_id(r);
    m.cardId = get_id(r);
    m.cardNonce = get_nonce(r);
    m.mSc1 = r.var();
    return true;
}

void body(ByteWriter& w, const TokenResponse& m) {
    w.var(BytesView(m.tokenReader.data(), m.tokenReader.size()));
    w.var(BytesView(m.tokenCard.data(), m.tokenCard.size()));
}
bool body(ByteReader& r, TokenResponse& m) {
    m.tokenReader = r.var();
    m.tokenCard = r.var();
    return true;
}

void body(ByteWriter& w, const CardConfirm& m) {
    put_mac(w, m.mac);
    w.var(BytesView(m.tokenCard.data(), m.tokenCard.size()));
}
bool body(ByteReader& r, CardConfirm& m) {
    m.mac = get_mac(r);
    m.tokenCard = r.var();
    return true;
}

void body(ByteWriter& w, const CardConfirmReply& m) { put_mac(w, m.mac); }
bool body(ByteReader& r, CardConfirmReply& m) {
    m.mac = get_mac(r);
    return true;
}

void body(ByteWriter& w, const PinVerify& m) {
    w.var(BytesView(m.cryptogram.data(), m.cryptogram.size()));
}
bool body(ByteReader& r, PinVerify& m) {
    m.cryptogram = r.var();
    return true;
}

void body(ByteWriter& w, const PinReply& m) {
    w.var(BytesView(m.cryptogram.data(), m.cryptogram.size()));
    w.var(BytesView(m.mSc2.data(), m.mSc2.size()));
}
bool body(ByteReader& r, PinReply& m) {
    m.cryptogram = r.var();
    m.mSc2 = r.var();
    return true;
}

void body(ByteWriter& w, const SessionInit& m) {
    put_id(w, m.readerId);
    put_nonce(w, m.readerNonce);
}
bool body(ByteReader& r, SessionInit& m) {
    m.readerId = get_id(r);
    m.readerNonce = get_nonce(r);
    return true;
}

void body(ByteWriter& w, const SessionHello& m) {
    put_id(w, m.implantId);
    put_nonce(w, m.implantNonce);
}
bool body(ByteReader& r, SessionHello& m) {
    m.implantId = get_id(r);
    m.implantNonce = get_nonce(r);
    return true;
}

void body(ByteWriter& w, const KeyRequest& m) {
    put_id(w, m.readerId);
    put_id(w, m.cardId);
    put_id(w, m.implantId);
    put_nonce(w, m.readerNonce);
    put_nonce(w, m.implantNonce);
    w.u8(m.bedside);
    w.var(BytesView(m.mSc2.data(), m.mSc2.size()));
}
bool body(ByteReader& r, KeyRequest& m) {
    m.readerId = get_id(r);
    m.cardId = get_id(r);
    m.implantId = get_id(r);
    m.readerNonce = get_nonce(r);
    m.implantNonce = get_nonce(r);
    m.bedside = r.u8();
    if (m.bedside > 1) return false;
    m.mSc2 = r.var();
    return true;
}

void body(ByteWriter& w, const KeyResponse& m) {
    w.var(BytesView(m.mReader.data(), m.mReader.size()));
    w.var(BytesView(m.mImplant.data(), m.mImplant.size()));
}
bool body(ByteReader& r, KeyResponse& m) {
    m.mReader = r.var();
    m.mImplant = r.var();
    return true;
}

void body(ByteWriter& w, const KeyConfirm& m) {
    w.var(BytesView(m.mImplant.data(), m.mImplant.size()));
    w.var(BytesView(m.mRi.data(), m.mRi.size()));
}
bool body(ByteReader& r, KeyConfirm& m) {
    m.mImplant = r.var();
    m.mRi = r.var();
    return true;
}

void body(ByteWriter& w, const KeyConfirmReply& m) { put_mac(w, m.mac); }
bool body(ByteReader& r, KeyConfirmReply& m) {
    m.mac = get_mac(r);
    return true;
}

void body(ByteWriter& w, const AuthFail& m) { put_mac(w, m.mac); }
bool body(ByteReader& r, AuthFail& m) {
    m.mac = get_mac(r);
    return true;
}

void body(ByteWriter& w, const CommandToCard& m) {
    w.var(BytesView(m.cryptogram.data(), m.cryptogram.size()));
}
bool body(ByteReader& r, CommandToCard& m) {
    m.cryptogram = r.var();
    return true;
}

void body(ByteWriter& w, const CommandSignature& m) { put_sig(w, m.sig); }
bool body(ByteReader& r, CommandSignature& m) {
    m.sig = get_sig(r);
    return true;
}

void body(ByteWriter& w, const CommandToImplant& m) {
    w.var(BytesView(m.cryptogram.data(), m.cryptogram.size()));
    w.u8(static_cast<std::uint8_t>(m.authKind));
    w.var(BytesView(m.auth.data(), m.auth.size()));
}
bool body(ByteReader& r, CommandToImplant& m) {
    m.cryptogram = r.var();
    auto kind = r.u8();
    if (kind > 2) return false;
    m.authKind = static_cast<CommandAuthKind>(kind);
    m.auth = r.var();
    switch (m.authKind) {
        case CommandAuthKind::None: return m.auth.empty();
        case CommandAuthKind::CardSignature: return m.auth.size() == kSignatureBytes;
        case CommandAuthKind::ServerMac: return m.auth.size() == kMacBytes;
    }
    return false;
}

void body(ByteWriter& w, const CommandAnswer& m) {
    w.u32(m.chunkIndex);
    w.u32(m.chunkCount);
    w.var(BytesView(m.cryptogram.data(), m.cryptogram.size()));
}
bool body(ByteReader& r, CommandAnswer& m) {
    m.chunkIndex = r.u32();
    m.chunkCount = r.u32();
    m.cryptogram = r.var();
    return m.chunkCount > 0 && m.chunkIndex < m.chunkCount;
}

void body(ByteWriter& w, const BedsideCommand& m) {
    w.var(BytesView(m.cryptogram.data(), m.cryptogram.size()));
}
bool body(ByteReader& r, BedsideCommand& m) {
    m.cryptogram = r.var();
    return true;
}

void body(ByteWriter& w, const BedsideAnswer& m) {
    w.u32(m.chunkIndex);
    w.u32(m.chunkCount);
    w.var(BytesView(m.cryptogram.data(), m.cryptogram.size()));
}
bool body(ByteReader& r, BedsideAnswer& m) {
    m.chunkIndex = r.u32();
    m.chunkCount = r.u32();
    m.cryptogram = r.var();
    return m.chunkCount > 0 && m.chunkIndex < m.chunkCount;
}

void body(ByteWriter& w, const BedsideReady& m) {
    w.var(BytesView(m.cryptogram.data(), m.cryptogram.size()));
}
bool body(ByteReader& r, BedsideReady& m) {
    m.cryptogram = r.var();
    return true;
}

void body(ByteWriter& w, const OobAccessRequest& m) { put_id(w, m.readerId); }
bool body(ByteReader& r, OobAccessRequest& m) {
    m.readerId = get_id(r);
    return true;
}

void body(ByteWriter& w, const OobKeyTransfer& m) {
    put_id(w, m.implantId);
    put_nonce(w, m.implantNonce);
    w.raw(BytesView(m.sessionKey.raw.data(), m.sessionKey.raw.size()));
}
bool body(ByteReader& r, OobKeyTransfer& m) {
    m.implantId = get_id(r);
    m.implantNonce = get_nonce(r);
    m.sessionKey.raw = r.arr<kKeyBytes>();
    m.sessionKey.role = KeyRole::ShortTermReaderImplant;
    return true;
}

void body(ByteWriter& w, const OfflineConfirm& m) {
    put_nonce(w, m.readerNonce);
    put_id(w, m.cardId);
    put_nonce(w, m.cardNonce);
    put_mac(w, m.mac);
}
bool body(ByteReader& r, OfflineConfirm& m) {
    m.readerNonce = get_nonce(r);
    m.cardId = get_id(r);
    m.cardNonce = get_nonce(r);
    m.mac = get_mac(r);
    return true;
}

void body(ByteWriter& w, const OfflineConfirmReply& m) { put_mac(w, m.mac); }
bool body(ByteReader& r, OfflineConfirmReply& m) {
    m.mac = get_mac(r);
    return true;
}

void body(ByteWriter& w, const RemoteKeyRequest& m) {
    put_id(w, m.implantId);
    w.var(BytesView(m.payload.data(), m.payload.size()));
}
bool body(ByteReader& r, RemoteKeyRequest& m) {
    m.implantId = get_id(r);
    m.payload = r.var();
    return true;
}

void body(ByteWriter& w, const RemoteKeyForward& m) {
    put_id(w, m.implantId);
    put_id(w, m.originServerId);
    w.var(BytesView(m.payload.data(), m.payload.size()));
}
bool body(ByteReader& r, RemoteKeyForward& m) {
    m.implantId = get_id(r);
    m.originServerId = get_id(r);
    m.payload = r.var();
    return true;
}

void body(ByteWriter& w, const RemoteKeyReply& m) {
    put_id(w, m.implantId);
    w.var(BytesView(m.mImplant.data(), m.mImplant.size()));
}
bool body(ByteReader& r, RemoteKeyReply& m) {
    m.implantId = get_id(r);
    m.mImplant = r.var();
    return true;
}

void body(ByteWriter& w, const RemoteFail& m) { w.u8(static_cast<std::uint8_t>(m.reason)); }
bool body(ByteReader& r, RemoteFail& m) {
    auto v = r.u8();
    if (v < 1 || v > kMaxRejectReason) return false;
    m.reason = static_cast<RejectReason>(v);
    return true;
}

template <typename T>
DecodeResult decode_as(BytesView data) {
    T out{};
    try {
        ByteReader r(data);
        if (!body(r, out)) return {std::nullopt, DecodeError::BadField};
        if (!r.exhausted()) return {std::nullopt, DecodeError::BadField};
    } catch (const ByteReader::Underflow&) {
        return {std::nullopt, DecodeError::BadField};
    }
    return {Message{std::move(out)}, DecodeError::BadField};
}

struct TypeOf {
    MsgType operator()(const ReaderHello&) const { return MsgType::ReaderHello; }
    MsgType operator()(const PuzzleChallenge&) const { return MsgType::PuzzleChallenge; }
    MsgType operator()(const PuzzleResponse&) const { return MsgType::PuzzleResponse; }
    MsgType operator()(const ServerHello&) const { return MsgType::ServerHello; }
    MsgType operator()(const DhInit&) const { return MsgType::DhInit; }
    MsgType operator()(const DhResponse&) const { return MsgType::DhResponse; }
    MsgType operator()(const Reject&) const { return MsgType::Reject; }
    MsgType operator()(const CardAuthInit&) const { return MsgType::CardAuthInit; }
    MsgType operator()(const CardAuthReply&) const { return MsgType::CardAuthReply; }
    MsgType operator()(const TokenRequest&) const { return MsgType::TokenRequest; }
    MsgType operator()(const TokenResponse&) const { return MsgType::TokenResponse; }
    MsgType operator()(const CardConfirm&) const { return MsgType::CardConfirm; }
    MsgType operator()(const CardConfirmReply&) const { return MsgType::CardConfirmReply; }
    MsgType operator()(const PinVerify&) const { return MsgType::PinVerify; }
    MsgType operator()(const PinReply&) const { return MsgType::PinReply; }
    MsgType operator()(const SessionInit&) const { return MsgType::SessionInit; }
    MsgType operator()(const SessionHello&) const { return MsgType::SessionHello; }
    MsgType operator()(const KeyRequest&) const { return MsgType::KeyRequest; }
    MsgType operator()(const KeyResponse&) const { return MsgType::KeyResponse; }
    MsgType operator()(const KeyConfirm&) const { return MsgType::KeyConfirm; }
    MsgType operator()(const KeyConfirmReply&) const { return MsgType::KeyConfirmReply; }
    MsgType operator()(const AuthFail&) const { return MsgType::AuthFail; }
    MsgType operator()(const CommandToCard&) const { return MsgType::CommandToCard; }
    MsgType operator()(const CommandSignature&) const { return MsgType::CommandSignature; }
    MsgType operator()(const CommandToImplant&) const { return MsgType::CommandToImplant; }
    MsgType operator()(const CommandAnswer&) const { return MsgType::CommandAnswer; }
    MsgType operator()(const BedsideCommand&) const { return MsgType::BedsideCommand; }
    MsgType operator()(const BedsideAnswer&) const { return MsgType::BedsideAnswer; }
    MsgType operator()(const BedsideReady&) const { return MsgType::BedsideReady; }
    MsgType operator()(const OobAccessRequest&) const { return MsgType::OobAccessRequest; }
    MsgType operator()(const OobKeyTransfer&) const { return MsgType::OobKeyTransfer; }
    MsgType operator()(const OfflineConfirm&) const { return MsgType::OfflineConfirm; }
    MsgType operator()(const OfflineConfirmReply&) const { return MsgType::OfflineConfirmReply; }
    MsgType operator()(const RemoteKeyRequest&) const { return MsgType::RemoteKeyRequest; }
    MsgType operator()(const RemoteKeyForward&) const { return MsgType::RemoteKeyForward; }
    MsgType operator()(const RemoteKeyReply&) const { return MsgType::RemoteKeyReply; }
    MsgType operator()(const RemoteFail&) const { return MsgType::RemoteFail; }
};

}  // namespace

MsgType msg_type(const Message& m) { return std::visit(TypeOf{}, m); }

const char* msg_type_name(MsgType t) {
    switch (t) {
        case MsgType::ReaderHello: return "ReaderHello";
        case MsgType::PuzzleChallenge: return "PuzzleChallenge";
        case MsgType::PuzzleResponse: return "PuzzleResponse";
        case MsgType::ServerHello: return "ServerHello";
        case MsgType::DhInit: return "DhInit";
        case MsgType::DhResponse: return "DhResponse";
        case MsgType::Reject: return "Reject";
        case MsgType::CardAuthInit: return "CardAuthInit";
        case MsgType::CardAuthReply: return "CardAuthReply";
        case MsgType::TokenRequest: return "TokenRequest";
        case MsgType::TokenResponse: return "TokenResponse";
        case MsgType::CardConfirm: return "CardConfirm";
        case MsgType::CardConfirmReply: return "CardConfirmReply";
        case MsgType::PinVerify: return "PinVerify";
        case MsgType::PinReply: return "PinReply";
        case MsgType::SessionInit: return "SessionInit";
        case MsgType::SessionHello: return "SessionHello";
        case MsgType::KeyRequest: return "KeyRequest";
        case MsgType::KeyResponse: return "KeyResponse";
        case MsgType::KeyConfirm: return "KeyConfirm";
        case MsgType::KeyConfirmReply: return "KeyConfirmReply";
        case MsgType::AuthFail: return "AuthFail";
        case MsgType::CommandToCard: return "CommandToCard";
        case MsgType::CommandSignature: return "CommandSignature";
        case MsgType::CommandToImplant: return "CommandToImplant";
        case MsgType::CommandAnswer: return "CommandAnswer";
        case MsgType::BedsideCommand: return "BedsideCommand";
        case MsgType::BedsideAnswer: return "BedsideAnswer";
        case MsgType::BedsideReady: return "BedsideReady";
        case MsgType::OobAccessRequest: return "OobAccessRequest";
        case MsgType::OobKeyTransfer: return "OobKeyTransfer";
        case MsgType::OfflineConfirm: return "OfflineConfirm";
        case MsgType::OfflineConfirmReply: return "OfflineConfirmReply";
        case MsgType::RemoteKeyRequest: return "RemoteKeyRequest";
        case MsgType::RemoteKeyForward: return "RemoteKeyForward";
        case MsgType::RemoteKeyReply: return "RemoteKeyReply";
        case MsgType::RemoteFail: return "RemoteFail";
    }
    return "?";
}

const char* reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::CertInvalid: return "cert-invalid";
        case RejectReason::CertRevoked: return "cert-revoked";
        case RejectReason::PuzzleWrongSolution: return "puzzle-wrong-solution";
        case RejectReason::PuzzleExpired: return "puzzle-expired";
        case RejectReason::CardUnknown: return "card-unknown";
        case RejectReason::CardRevoked: return "card-revoked";
        case RejectReason::NonceMismatch: return "nonce-mismatch";
        case RejectReason::MacFailure: return "mac-failure";
        case RejectReason::CryptogramInvalid: return "cryptogram-invalid";
        case RejectReason::CryptogramReused: return "cryptogram-reused";
        case RejectReason::ImplantUnknown: return "implant-unknown";
        case RejectReason::ServerLinkFailure: return "server-link-failure";
        case RejectReason::Busy: return "busy";
        case RejectReason::GroupElementInvalid: return "group-element-invalid";
        case RejectReason::PrivilegeViolation: return "privilege-violation";
        case RejectReason::SessionExpired: return "session-expired";
        case RejectReason::PolicyViolation: return "policy-violation";
    }
    return "?";
}

const char* decode_error_name(DecodeError e) {
    switch (e) {
        case DecodeError::UnknownTag: return "unknown-tag";
        case DecodeError::Truncated: return "truncated";
        case DecodeError::TrailingBytes: return "trailing-bytes";
        case DecodeError::BadField: return "bad-field";
    }
    return "?";
}

Bytes encode_frame(const Message& m) {
    ByteWriter bodyWriter;
    std::visit([&](const auto& msg) { body(bodyWriter, msg); }, m);
    Bytes bodyBytes = bodyWriter.take();
    if (bodyBytes.size() > 0xffff) throw std::invalid_argument("frame body exceeds 16-bit length");

    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(msg_type(m)));
    w.u16(static_cast<std::uint16_t>(bodyBytes.size()));
    w.raw(BytesView(bodyBytes.data(), bodyBytes.size()));
    return w.take();
}

DecodeResult decode_frame(BytesView bytes) {
    if (bytes.size() < kFrameHeaderBytes) return {std::nullopt, DecodeError::Truncated};
    std::uint8_t tag = bytes[0];
    std::size_t declared = (std::size_t(bytes[1]) << 8) | bytes[2];
    std::size_t actual = bytes.size() - kFrameHeaderBytes;
    if (actual < declared) return {std::nullopt, DecodeError::Truncated};
    if (actual > declared) return {std::nullopt, DecodeError::TrailingBytes};
    BytesView bodyBytes = bytes.subspan(kFrameHeaderBytes, declared);

    switch (static_cast<MsgType>(tag)) {
        case MsgType::ReaderHello: return decode_as<ReaderHello>(bodyBytes);
        case MsgType::PuzzleChallenge: return decode_as<PuzzleChallenge>(bodyBytes);
        case MsgType::PuzzleResponse: return decode_as<PuzzleResponse>(bodyBytes);
        case MsgType::ServerHello: return decode_as<ServerHello>(bodyBytes);
        case MsgType::DhInit: return decode_as<DhInit>(bodyBytes);
        case MsgType::DhResponse: return decode_as<DhResponse>(bodyBytes);
        case MsgType::Reject: return decode_as<Reject>(bodyBytes);
        case MsgType::CardAuthInit: return decode_as<CardAuthInit>(bodyBytes);
        case MsgType::CardAuthReply: return decode_as<CardAuthReply>(bodyBytes);
        case MsgType::TokenRequest: return decode_as<TokenRequest>(bodyBytes);
        case MsgType::TokenResponse: return decode_as<TokenResponse>(bodyBytes);
        case MsgType::CardConfirm: return decode_as<CardConfirm>(bodyBytes);
        case MsgType::CardConfirmReply: return decode_as<CardConfirmReply>(bodyBytes);
        case MsgType::PinVerify: return decode_as<PinVerify>(bodyBytes);
        case MsgType::PinReply: return decode_as<PinReply>(bodyBytes);
        case MsgType::SessionInit: return decode_as<SessionInit>(bodyBytes);
        case MsgType::SessionHello: return decode_as<SessionHello>(bodyBytes);
        case MsgType::KeyRequest: return decode_as<KeyRequest>(bodyBytes);
        case MsgType::KeyResponse: return decode_as<KeyResponse>(bodyBytes);
        case MsgType::KeyConfirm: return decode_as<KeyConfirm>(bodyBytes);
        case MsgType::KeyConfirmReply: return decode_as<KeyConfirmReply>(bodyBytes);
        case MsgType::AuthFail: return decode_as<AuthFail>(bodyBytes);
        case MsgType::CommandToCard: return decode_as<CommandToCard>(bodyBytes);
        case MsgType::CommandSignature: return decode_as<CommandSignature>(bodyBytes);
        case MsgType::CommandToImplant: return decode_as<CommandToImplant>(bodyBytes);
        case MsgType::CommandAnswer: return decode_as<CommandAnswer>(bodyBytes);
        case MsgType::BedsideCommand: return decode_as<BedsideCommand>(bodyBytes);
        case MsgType::BedsideAnswer: return decode_as<BedsideAnswer>(bodyBytes);
        case MsgType::BedsideReady: return decode_as<BedsideReady>(bodyBytes);
        case MsgType::OobAccessRequest: return decode_as<OobAccessRequest>(bodyBytes);
        case MsgType::OobKeyTransfer: return decode_as<OobKeyTransfer>(bodyBytes);
        case MsgType::OfflineConfirm: return decode_as<OfflineConfirm>(bodyBytes);
        case MsgType::OfflineConfirmReply: return decode_as<OfflineConfirmReply>(bodyBytes);
        case MsgType::RemoteKeyRequest: return decode_as<RemoteKeyRequest>(bodyBytes);
        case MsgType::RemoteKeyForward: return decode_as<RemoteKeyForward>(bodyBytes);
        case MsgType::RemoteKeyReply: return decode_as<RemoteKeyReply>(bodyBytes);
        case MsgType::RemoteFail: return decode_as<RemoteFail>(bodyBytes);
    }
    return {std::nullopt, DecodeError::UnknownTag};
}

}  // namespace imdsec::wire
