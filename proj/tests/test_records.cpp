#include "doctest.h"
#include "imdsec/crypto/suite.hpp"
#include "imdsec/records.hpp"
#include "imdsec/rng.hpp"

using namespace imdsec;

namespace {

SignatureRecord sample_record(Rng& rng) {
    SignatureRecord r;
    rng.fill(r.sig.raw.data(), r.sig.raw.size());
    r.cmd = Command{CommandKind::WriteTherapy, rng.next_u32() & 0xffffff};
    rng.fill(r.cardId.raw.data(), r.cardId.raw.size());
    r.cardNonce = Nonce{rng.next_u32()};
    r.readerNonce = Nonce{rng.next_u32()};
    return r;
}

}  // namespace

TEST_CASE("signature record encodes to exactly 72 bytes and round-trips") {
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        auto rec = sample_record(rng);
        auto enc = rec.encode();
        REQUIRE(enc.size() == SignatureRecord::kEncodedBytes);
        REQUIRE(enc.size() == 72);
        auto back = SignatureRecord::decode(BytesView(enc.data(), enc.size()));
        REQUIRE(back.has_value());
        CHECK(*back == rec);
    }
}

TEST_CASE("32 kB flash holds floor(32768/72) = 455 records") {
    SignatureFlash flash(32768);
    CHECK(flash.capacity_records() == 455);
    CHECK(SignatureFlash(72 * 3).capacity_records() == 3);
    CHECK(SignatureFlash(72 * 3 + 71).capacity_records() == 3);
}

TEST_CASE("first record lands in slot 0 of an empty flash") {
    Rng rng(2);
    SignatureFlash flash(32768);
    CHECK(flash.store(sample_record(rng)) == 0);
    CHECK(flash.size() == 1);
}

TEST_CASE("ring buffer overwrites strictly oldest-first") {
    Rng rng(3);
    SignatureFlash flash(72 * 4);  // 4 slots
    std::vector<SignatureRecord> recs;
    for (int i = 0; i < 6; ++i) recs.push_back(sample_record(rng));

    for (int i = 0; i < 4; ++i) CHECK(flash.store(recs[i]) == std::size_t(i));
    CHECK(flash.store(recs[4]) == 0);  // wraps onto the oldest
    CHECK(flash.store(recs[5]) == 1);
    CHECK(flash.at_slot(0) == recs[4]);
    CHECK(flash.at_slot(1) == recs[5]);
    CHECK(flash.at_slot(2) == recs[2]);
    CHECK(flash.at_slot(3) == recs[3]);
}

TEST_CASE("overwrite attack needs 455 further writes on a 32 kB flash") {
    // The target signature goes in first; count the harmless writes until
    // its slot is reused. The flash arithmetic gives 455; the figure quoted
    // alongside in reports is 456 because it counts the malicious write
    // itself as the first of the sequence.
    Rng rng(4);
    SignatureFlash flash(32768);
    auto target = sample_record(rng);
    std::size_t targetSlot = flash.store(target);

    std::size_t attempts = 0;
    for (;;) {
        ++attempts;
        std::size_t slot = flash.store(sample_record(rng));
        if (slot == targetSlot) break;
    }
    CHECK(attempts == 455);
    CHECK((attempts == 455 || attempts == 456));
    CHECK(flash.at_slot(targetSlot) != target);
}

TEST_CASE("dump parses back; partial trailing bytes are reported") {
    Rng rng(5);
    SignatureFlash flash(32768);
    for (int i = 0; i < 5; ++i) flash.store(sample_record(rng));
    auto dump = flash.dump();
    CHECK(dump.size() == 5 * 72);

    std::size_t trailing = 0;
    auto parsed = SignatureFlash::parse_dump(BytesView(dump.data(), dump.size()), &trailing);
    CHECK(parsed.size() == 5);
    CHECK(trailing == 0);

    dump.resize(dump.size() - 10);  // torn final record
    parsed = SignatureFlash::parse_dump(BytesView(dump.data(), dump.size()), &trailing);
    CHECK(parsed.size() == 4);
    CHECK(trailing == 62);
}

TEST_CASE("signed payload binds cmd and both nonces") {
    Rng rng(6);
    auto seed = rng.bytes(32);
    auto kp = crypto::p192::keypair_from_seed(BytesView(seed.data(), seed.size()));
    SignatureRecord rec;
    rec.cmd = Command{CommandKind::WriteTherapy, 42};
    rec.cardNonce = Nonce{1111};
    rec.readerNonce = Nonce{2222};
    auto payload = rec.signed_payload();
    CHECK(payload.size() == 12);
    rec.sig = crypto::sign(kp.priv, BytesView(payload.data(), payload.size()));
    CHECK(crypto::verify_sig(kp.pub, BytesView(payload.data(), payload.size()), rec.sig));

    auto tampered = rec;
    tampered.cmd.payload = 43;
    auto tp = tampered.signed_payload();
    CHECK_FALSE(crypto::verify_sig(kp.pub, BytesView(tp.data(), tp.size()), rec.sig));
}
