#include "doctest.h"
#include "imdsec/crypto/suite.hpp"
#include "imdsec/rng.hpp"
#include "imdsec/wire.hpp"

using namespace imdsec;
using namespace imdsec::wire;

namespace {

EntityId rand_id(Rng& rng) {
    EntityId id;
    rng.fill(id.raw.data(), id.raw.size());
    return id;
}

Bytes rand_bytes(Rng& rng, std::size_t n) { return rng.bytes(n); }

// Generator covering every message type with randomized field content.
std::vector<Message> sample_messages(Rng& rng) {
    std::vector<Message> out;
    out.push_back(ReaderHello{rand_id(rng), Nonce{rng.next_u32()}});
    PuzzleChallenge pc;
    rng.fill(pc.digestOfX.data(), pc.digestOfX.size());
    pc.difficulty = 12;
    pc.partialX = rand_bytes(rng, (256 - 12 + 7) / 8);
    pc.timestampMs = rng.next_u64() >> 20;
    out.push_back(pc);
    out.push_back(PuzzleResponse{rand_id(rng), rng.next_u64() >> 20, 12, rand_bytes(rng, 2)});
    out.push_back(ServerHello{rand_id(rng), Nonce{rng.next_u32()}});
    DhInit dh;
    dh.certificate = rand_bytes(rng, Certificate::kEncodedSize);
    rng.fill(dh.ephemeral.raw.data(), dh.ephemeral.raw.size());
    rng.fill(dh.bindingSig.raw.data(), dh.bindingSig.raw.size());
    out.push_back(dh);
    DhResponse dhr;
    dhr.certificate = rand_bytes(rng, Certificate::kEncodedSize);
    rng.fill(dhr.ephemeral.raw.data(), dhr.ephemeral.raw.size());
    rng.fill(dhr.bindingSig.raw.data(), dhr.bindingSig.raw.size());
    out.push_back(dhr);
    out.push_back(Reject{RejectReason::CardRevoked});
    out.push_back(CardAuthInit{rand_id(rng), Nonce{rng.next_u32()}, Nonce{rng.next_u32()}});
    out.push_back(CardAuthReply{rand_id(rng), Nonce{rng.next_u32()}, rand_bytes(rng, 170)});
    out.push_back(TokenRequest{rand_id(rng), rand_id(rng), Nonce{rng.next_u32()},
                               rand_bytes(rng, 170)});
    out.push_back(TokenResponse{rand_bytes(rng, 69), rand_bytes(rng, 64)});
    CardConfirm cc;
    rng.fill(cc.mac.data(), cc.mac.size());
    cc.tokenCard = rand_bytes(rng, 64);
    out.push_back(cc);
    CardConfirmReply ccr;
    rng.fill(ccr.mac.data(), ccr.mac.size());
    out.push_back(ccr);
    out.push_back(PinVerify{rand_bytes(rng, 40)});
    out.push_back(PinReply{rand_bytes(rng, 37), rand_bytes(rng, 37)});
    out.push_back(SessionInit{rand_id(rng), Nonce{rng.next_u32()}});
    out.push_back(SessionHello{rand_id(rng), Nonce{rng.next_u32()}});
    KeyRequest kr;
    kr.readerId = rand_id(rng);
    kr.cardId = rand_id(rng);
    kr.implantId = rand_id(rng);
    kr.readerNonce = Nonce{rng.next_u32()};
    kr.implantNonce = Nonce{rng.next_u32()};
    kr.bedside = 0;
    kr.mSc2 = rand_bytes(rng, 37);
    out.push_back(kr);
    out.push_back(KeyResponse{rand_bytes(rng, 65), rand_bytes(rng, 82)});
    out.push_back(KeyConfirm{rand_bytes(rng, 82), rand_bytes(rng, 36)});
    KeyConfirmReply kcr;
    rng.fill(kcr.mac.data(), kcr.mac.size());
    out.push_back(kcr);
    AuthFail af;
    rng.fill(af.mac.data(), af.mac.size());
    out.push_back(af);
    out.push_back(CommandToCard{rand_bytes(rng, 40)});
    CommandSignature cs;
    rng.fill(cs.sig.raw.data(), cs.sig.raw.size());
    out.push_back(cs);
    CommandToImplant cti;
    cti.cryptogram = rand_bytes(rng, 40);
    cti.authKind = CommandAuthKind::CardSignature;
    cti.auth = rand_bytes(rng, kSignatureBytes);
    out.push_back(cti);
    out.push_back(CommandAnswer{0, 2, rand_bytes(rng, 44)});
    out.push_back(BedsideCommand{rand_bytes(rng, 56)});
    out.push_back(BedsideAnswer{1, 3, rand_bytes(rng, 44)});
    out.push_back(BedsideReady{rand_bytes(rng, 48)});
    out.push_back(OobAccessRequest{rand_id(rng)});
    OobKeyTransfer okt;
    okt.implantId = rand_id(rng);
    okt.implantNonce = Nonce{rng.next_u32()};
    rng.fill(okt.sessionKey.raw.data(), okt.sessionKey.raw.size());
    out.push_back(okt);
    OfflineConfirm oc;
    oc.readerNonce = Nonce{rng.next_u32()};
    oc.cardId = rand_id(rng);
    oc.cardNonce = Nonce{rng.next_u32()};
    rng.fill(oc.mac.data(), oc.mac.size());
    out.push_back(oc);
    OfflineConfirmReply ocr;
    rng.fill(ocr.mac.data(), ocr.mac.size());
    out.push_back(ocr);
    out.push_back(RemoteKeyRequest{rand_id(rng), rand_bytes(rng, 82)});
    out.push_back(RemoteKeyForward{rand_id(rng), rand_id(rng), rand_bytes(rng, 82)});
    out.push_back(RemoteKeyReply{rand_id(rng), rand_bytes(rng, 82)});
    out.push_back(RemoteFail{RejectReason::ImplantUnknown});
    return out;
}

}  // namespace

TEST_CASE("frame roundtrip across the whole message set") {
    Rng rng(0xA11CE);
    for (int iter = 0; iter < 50; ++iter) {
        for (const auto& msg : sample_messages(rng)) {
            auto frame = encode_frame(msg);
            auto back = decode_frame(BytesView(frame.data(), frame.size()));
            REQUIRE(back.ok());
            CHECK(msg_type(*back.message) == msg_type(msg));
            CHECK(encode_frame(*back.message) == frame);
        }
    }
}

TEST_CASE("command word encodes to 32 bits with zero payload all-zero") {
    Command cmd{CommandKind::ReadStatus, 0};
    CHECK(cmd.word() == 0x00000000u);
    ByteWriter w;
    w.u32(cmd.word());
    CHECK(w.bytes() == Bytes{0, 0, 0, 0});
    CHECK(Command::from_word(0x00000000u) == cmd);
}

TEST_CASE("main-phase command frame layout matches the published widths") {
    // Body: var(iv 12 + ct 12 + tag 16) + authKind + var(sig 48); the
    // cryptogram carries CMD(4) and two nonces(4+4).
    Rng rng(7);
    SymmetricKey k;
    rng.fill(k.raw.data(), k.raw.size());
    ByteWriter inner;
    inner.u32(Command{CommandKind::WriteTherapy, 9}.word());
    inner.u32(111);
    inner.u32(222);
    CommandToImplant msg;
    msg.authKind = CommandAuthKind::CardSignature;
    msg.auth = Bytes(kSignatureBytes, 0xAB);
    msg.cryptogram = crypto::aead_encrypt(k, BytesView(inner.bytes().data(), inner.bytes().size()),
                                          BytesView(msg.auth.data(), msg.auth.size()), rng);
    CHECK(msg.cryptogram.size() == crypto::kAeadOverhead + 12);
    auto frame = encode_frame(msg);
    CHECK(frame.size() == kFrameHeaderBytes + (2 + crypto::kAeadOverhead + 12) + 1 + (2 + 48));
}

TEST_CASE("field width conformance") {
    CHECK(kNonceBytes == 4);
    CHECK(kEntityIdBytes == 12);
    CHECK(kCommandBytes == 4);
    CHECK(kAnswerBytes == 8);
    CHECK(kSignatureBytes == 48);
    auto frame = encode_frame(SessionInit{EntityId::from_u64(5), Nonce{9}});
    CHECK(frame.size() == kFrameHeaderBytes + kEntityIdBytes + kNonceBytes);
}

TEST_CASE("decode distinguishes unknown tag, truncation and trailing bytes") {
    auto empty = decode_frame(BytesView{});
    CHECK_FALSE(empty.ok());
    CHECK(empty.error == DecodeError::Truncated);

    auto frame = encode_frame(SessionInit{EntityId::from_u64(1), Nonce{2}});

    Bytes unknown = frame;
    unknown[0] = 0xEE;
    auto u = decode_frame(BytesView(unknown.data(), unknown.size()));
    CHECK_FALSE(u.ok());
    CHECK(u.error == DecodeError::UnknownTag);

    Bytes shortFrame(frame.begin(), frame.end() - 3);
    auto t = decode_frame(BytesView(shortFrame.data(), shortFrame.size()));
    CHECK_FALSE(t.ok());
    CHECK(t.error == DecodeError::Truncated);

    Bytes longFrame = frame;
    longFrame.push_back(0x00);
    auto tr = decode_frame(BytesView(longFrame.data(), longFrame.size()));
    CHECK_FALSE(tr.ok());
    CHECK(tr.error == DecodeError::TrailingBytes);
}

TEST_CASE("flipping a length byte yields a length-mismatch error") {
    Rng rng(99);
    for (const auto& msg : sample_messages(rng)) {
        auto frame = encode_frame(msg);
        for (std::size_t lenByte : {std::size_t(1), std::size_t(2)}) {
            Bytes bad = frame;
            bad[lenByte] ^= 0x01;
            auto r = decode_frame(BytesView(bad.data(), bad.size()));
            if (r.ok()) continue;  // inner var-length field absorbed the flip
            bool lengthMismatch =
                r.error == DecodeError::Truncated || r.error == DecodeError::TrailingBytes ||
                r.error == DecodeError::BadField;
            CHECK(lengthMismatch);
        }
    }
}

TEST_CASE("privilege order is total and the command map deterministic") {
    CHECK(Privilege::ReadOnly < Privilege::ReadWrite);
    CHECK(Privilege::ReadWrite < Privilege::ReadWriteFirmware);
    CHECK(Privilege::ReadOnly < Privilege::ReadWriteFirmware);

    CHECK(required_privilege(CommandKind::ReadStatus) == Privilege::ReadOnly);
    CHECK(required_privilege(CommandKind::Finish) == Privilege::ReadOnly);
    CHECK(required_privilege(CommandKind::WriteTherapy) == Privilege::ReadWrite);
    CHECK(required_privilege(CommandKind::Suspend) == Privilege::ReadWrite);
    CHECK(required_privilege(CommandKind::Resume) == Privilege::ReadWrite);
    CHECK(required_privilege(CommandKind::FirmwareUpdate) == Privilege::ReadWriteFirmware);

    CHECK(privilege_for_role(UserRole::Patient) == Privilege::ReadOnly);
    CHECK(privilege_for_role(UserRole::Nurse) == Privilege::ReadOnly);
    CHECK(privilege_for_role(UserRole::Relative) == Privilege::ReadOnly);
    CHECK(privilege_for_role(UserRole::Physician) == Privilege::ReadWrite);
    CHECK(privilege_for_role(UserRole::Paramedic) == Privilege::ReadWrite);
    CHECK(privilege_for_role(UserRole::Technician) == Privilege::ReadWriteFirmware);
}

TEST_CASE("nonce increment wraps modulo 2^32") {
    Nonce n{0xffffffffu};
    CHECK(n.plus(1).value == 0u);
    CHECK(Nonce{5}.plus(1).value == 6u);
    CHECK(n.plus(3).value == 2u);
}

TEST_CASE("encoding a field beyond its declared width throws") {
    wire::PinVerify oversized;
    oversized.cryptogram.assign(0x10000, 0xAA);  // exceeds the u16 length prefix
    CHECK_THROWS_AS(wire::encode_frame(wire::Message{oversized}), std::invalid_argument);
}

TEST_CASE("decoder survives arbitrary and mutated inputs") {
    Rng rng(0xF0220);
    // Pure noise of assorted lengths.
    for (int i = 0; i < 2000; ++i) {
        auto junk = rng.bytes(rng.below(96));
        auto r = decode_frame(BytesView(junk.data(), junk.size()));
        if (r.ok()) CHECK(encode_frame(*r.message).size() == junk.size());
    }
    // Valid frames with a few random byte mutations applied.
    for (int iter = 0; iter < 20; ++iter) {
        for (const auto& msg : sample_messages(rng)) {
            auto frame = encode_frame(msg);
            Bytes mut = frame;
            for (int k = 0; k < 3; ++k) mut[rng.below(mut.size())] ^= std::uint8_t(1 + rng.below(255));
            auto r = decode_frame(BytesView(mut.data(), mut.size()));
            if (r.ok()) {
                // Whatever decoded must re-encode to the same bytes.
                CHECK(encode_frame(*r.message) == mut);
            }
        }
    }
}
