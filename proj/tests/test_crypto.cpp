#include "doctest.h"
#include "imdsec/crypto/aes128.hpp"
#include "imdsec/crypto/cmac.hpp"
#include "imdsec/crypto/ecp192.hpp"
#include "imdsec/crypto/sha256.hpp"
#include "imdsec/crypto/suite.hpp"
#include "imdsec/puzzle.hpp"

using namespace imdsec;
using namespace imdsec::crypto;

TEST_CASE("sha256 matches published vectors") {
    CHECK(to_hex(BytesView(Sha256::digest(BytesView{}).data(), 32)) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    auto abc = to_bytes("abc");
    CHECK(to_hex(BytesView(Sha256::digest(BytesView(abc.data(), abc.size())).data(), 32)) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    // Multi-block input
    auto longMsg = to_bytes("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq");
    CHECK(to_hex(BytesView(Sha256::digest(BytesView(longMsg.data(), longMsg.size())).data(), 32)) ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("aes-128 matches the FIPS-197 vector") {
    std::array<std::uint8_t, 16> key{}, pt{};
    for (int i = 0; i < 16; ++i) {
        key[i] = static_cast<std::uint8_t>(i);
        pt[i] = static_cast<std::uint8_t>((i << 4) | i);
    }
    Aes128 aes(key);
    auto ct = aes.encrypt_block(pt);
    CHECK(to_hex(BytesView(ct.data(), 16)) == "69c4e0d86a7b0430d8cdb78070b4c55a");
}

TEST_CASE("aes-cmac matches RFC 4493 vectors") {
    auto keyBytes = from_hex("2b7e151628aed2a6abf7158809cf4f3c");
    std::array<std::uint8_t, 16> key{};
    std::copy(keyBytes.begin(), keyBytes.end(), key.begin());

    CHECK(to_hex(BytesView(aes_cmac(key, BytesView{}).data(), 16)) ==
          "bb1d6929e95937287fa37d129b756746");
    auto m16 = from_hex("6bc1bee22e409f96e93d7e117393172a");
    CHECK(to_hex(BytesView(aes_cmac(key, BytesView(m16.data(), m16.size())).data(), 16)) ==
          "070a16b46b4d4144f79bdd9dd04a287c");
    auto m40 = from_hex(
        "6bc1bee22e409f96e93d7e117393172aae2d8a571e03ac9c9eb76fac45af8e5130c81c46a35ce411");
    CHECK(to_hex(BytesView(aes_cmac(key, BytesView(m40.data(), m40.size())).data(), 16)) ==
          "dfa66747de9ae63030ca32611497c827");
}

TEST_CASE("aead roundtrip, wrong key, and exhaustive bit flips") {
    Rng rng(100);
    SymmetricKey k, k2;
    rng.fill(k.raw.data(), k.raw.size());
    rng.fill(k2.raw.data(), k2.raw.size());
    auto pt = to_bytes("therapy parameters");
    auto ad = to_bytes("hdr");

    auto sealed = aead_encrypt(k, BytesView(pt.data(), pt.size()), BytesView(ad.data(), ad.size()),
                               rng);
    auto open = aead_decrypt(k, BytesView(sealed.data(), sealed.size()),
                             BytesView(ad.data(), ad.size()));
    REQUIRE(open.has_value());
    CHECK(*open == pt);

    CHECK_FALSE(aead_decrypt(k2, BytesView(sealed.data(), sealed.size()),
                             BytesView(ad.data(), ad.size()))
                    .has_value());
    CHECK_FALSE(aead_decrypt(k, BytesView(sealed.data(), sealed.size()), BytesView{}).has_value());

    // Every single-bit mutation of the sealed message must fail to open.
    for (std::size_t byte = 0; byte < sealed.size(); ++byte) {
        for (int bit = 0; bit < 8; ++bit) {
            Bytes mut = sealed;
            mut[byte] ^= static_cast<std::uint8_t>(1u << bit);
            CHECK_FALSE(aead_decrypt(k, BytesView(mut.data(), mut.size()),
                                     BytesView(ad.data(), ad.size()))
                            .has_value());
        }
    }
}

TEST_CASE("etm discipline: encryption and MAC subkeys are never equal") {
    Rng rng(555);
    for (int i = 0; i < 200; ++i) {
        SymmetricKey k;
        rng.fill(k.raw.data(), k.raw.size());
        CHECK(derive_subkey(k, "imdsec-enc") != derive_subkey(k, "imdsec-mac"));
    }
}

TEST_CASE("mac determinism and verification") {
    Rng rng(77);
    SymmetricKey k;
    rng.fill(k.raw.data(), k.raw.size());
    auto m = to_bytes("nonces");
    auto tag = mac(k, BytesView(m.data(), m.size()));
    CHECK(tag == mac(k, BytesView(m.data(), m.size())));
    CHECK(mac_verify(k, BytesView(m.data(), m.size()), tag));
    auto m2 = to_bytes("noncez");
    CHECK_FALSE(mac_verify(k, BytesView(m2.data(), m2.size()), tag));
    CHECK(tag.size() == 16);  // 16-byte tag on the wire
}

TEST_CASE("signatures verify, reject other keys, and occupy 48 bytes") {
    Rng rng(31337);
    auto seedA = rng.bytes(32);
    auto seedB = rng.bytes(32);
    auto a = p192::keypair_from_seed(BytesView(seedA.data(), seedA.size()));
    auto b = p192::keypair_from_seed(BytesView(seedB.data(), seedB.size()));
    auto msg = to_bytes("WriteTherapy 42");

    auto sig = p192::sign(a.priv, BytesView(msg.data(), msg.size()));
    CHECK(sig.raw.size() == kSignatureBytes);
    CHECK(p192::verify(a.pub, BytesView(msg.data(), msg.size()), sig));
    CHECK_FALSE(p192::verify(b.pub, BytesView(msg.data(), msg.size()), sig));
    auto other = to_bytes("WriteTherapy 43");
    CHECK_FALSE(p192::verify(a.pub, BytesView(other.data(), other.size()), sig));

    // Malformed encodings fail verification without crashing.
    Signature zero{};
    CHECK_FALSE(p192::verify(a.pub, BytesView(msg.data(), msg.size()), zero));
    Signature garbage;
    rng.fill(garbage.raw.data(), garbage.raw.size());
    CHECK_FALSE(p192::verify(a.pub, BytesView(msg.data(), msg.size()), garbage));
    PublicKey badPoint;
    rng.fill(badPoint.raw.data(), badPoint.raw.size());
    CHECK_FALSE(p192::verify(badPoint, BytesView(msg.data(), msg.size()), sig));
}

TEST_CASE("dh handshake symmetry, freshness and group validation") {
    Rng rng(4242);
    auto a = dh_generate(rng);
    auto b = dh_generate(rng);
    Nonce nr{1}, ns{2};

    auto kA = dh_exchange(a, b.keys.pub, nr, ns, KeyRole::ShortTermReaderServer);
    auto kB = dh_exchange(b, a.keys.pub, nr, ns, KeyRole::ShortTermReaderServer);
    REQUIRE(kA);
    REQUIRE(kB);
    CHECK(kA->raw == kB->raw);

    // Fresh ephemerals give a different key every handshake.
    auto a2 = dh_generate(rng);
    auto b2 = dh_generate(rng);
    auto k2 = dh_exchange(a2, b2.keys.pub, nr, ns, KeyRole::ShortTermReaderServer);
    REQUIRE(k2);
    CHECK(k2->raw != kA->raw);

    PublicKey invalid;
    rng.fill(invalid.raw.data(), invalid.raw.size());
    CHECK_FALSE(dh_exchange(a, invalid, nr, ns, KeyRole::ShortTermReaderServer).has_value());
    CHECK_FALSE(p192::on_curve(invalid));
}

TEST_CASE("toy group brute-force oracle recovers the secret") {
    // Production parameters run on P-192; this demonstrates the discrete-log
    // oracle works where the group is small enough to enumerate.
    std::uint32_t secret = 0x2f9c;
    auto pub = toy_dh::public_value(secret);
    auto broken = toy_dh::break_secret(pub);
    REQUIRE(broken.has_value());
    CHECK(toy_dh::public_value(*broken) == pub);
    CHECK(toy_dh::shared_secret(*broken, toy_dh::public_value(777)) ==
          toy_dh::shared_secret(777, pub));
}

TEST_CASE("truncated-hash preimage work scales as 2^k") {
    // Monte Carlo over the puzzle primitive: finding the k missing bits of
    // x takes about 2^(k-1) tries on average with an exhaustive solver.
    for (std::uint8_t k : {4, 8, 10}) {
        Rng rng(9000 + k);
        SymmetricKey secret;
        rng.fill(secret.raw.data(), secret.raw.size());
        double total = 0;
        const int trials = k <= 8 ? 300 : 150;
        for (int i = 0; i < trials; ++i) {
            auto challenge = puzzle::issue(EntityId::from_u64(rng.next_u64()), i, secret, k);
            auto solved = puzzle::solve(challenge);
            REQUIRE(solved.has_value());
            total += static_cast<double>(solved->hashEvaluations);
        }
        double mean = total / trials;
        double expected = (double(1u << k) + 1) / 2;
        CHECK(mean > expected * 0.80);
        CHECK(mean < expected * 1.20);
    }
}

TEST_CASE("seeded randomness reproduces identical ciphertexts") {
    SymmetricKey k;
    for (int i = 0; i < 16; ++i) k.raw[i] = static_cast<std::uint8_t>(i * 3);
    auto pt = to_bytes("deterministic");
    Rng r1(12345), r2(12345);
    auto s1 = aead_encrypt(k, BytesView(pt.data(), pt.size()), BytesView{}, r1);
    auto s2 = aead_encrypt(k, BytesView(pt.data(), pt.size()), BytesView{}, r2);
    CHECK(s1 == s2);
}
