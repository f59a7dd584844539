#include "imdsec/entities/card.hpp"

namespace imdsec::entities {

namespace {

Bytes cat_u32(std::initializer_list<std::uint32_t> vals) {
    ByteWriter w;
    for (auto v : vals) w.u32(v);
    return w.take();
}

}  // namespace

SmartCard::SmartCard(const Config& cfg) : cfg_(cfg), rng_(cfg.rngSeed) {
    pinHash_ = pin_digest(cfg.id, cfg.pin);
}

SmartCard::Digest SmartCard::pin_digest(const EntityId& id, std::uint32_t pin) {
    ByteWriter w;
    w.raw(BytesView(id.raw.data(), id.raw.size()));
    w.u32(pin);
    return crypto::hash(w.bytes());
}

void SmartCard::power_cycle() {
    pending_ = Pending{};
    commandRound_ = 0;
}

void SmartCard::reject(const Envelope& env, wire::RejectReason r, Outbox& out) {
    out.send(env.channel, cfg_.id, env.src, wire::Reject{r});
}

void SmartCard::on_message(const Envelope& env, SimTimeMs now, Outbox& out) {
    (void)now;
    if (auto* m = std::get_if<wire::CardAuthInit>(&env.msg)) return handle_auth_init(*m, env, out);
    if (auto* m = std::get_if<wire::CardConfirm>(&env.msg)) return handle_confirm(*m, env, out);
    if (auto* m = std::get_if<wire::PinVerify>(&env.msg)) return handle_pin(*m, env, out);
    if (auto* m = std::get_if<wire::CommandToCard>(&env.msg)) return handle_command(*m, env, out);
    // Anything else is not addressed to a card; ignore.
}

void SmartCard::handle_auth_init(const wire::CardAuthInit& m, const Envelope& env, Outbox& out) {
    if (locked_) return reject(env, wire::RejectReason::Busy, out);

    pending_.active = true;
    pending_.readerId = m.readerId;
    pending_.readerNonce = m.readerNonce;
    pending_.serverNonce = m.serverNonce;
    pending_.cardNonce = Nonce{rng_.next_u32()};

    auto certBytes = cfg_.certificate.encode();
    ByteWriter inner;
    inner.raw(BytesView(certBytes.data(), certBytes.size()));
    inner.raw(BytesView(m.readerId.raw.data(), m.readerId.raw.size()));
    inner.u32(m.readerNonce.value);
    inner.u32(m.serverNonce.value);
    inner.u32(pending_.cardNonce.value);

    wire::CardAuthReply reply;
    reply.cardId = cfg_.id;
    reply.cardNonce = pending_.cardNonce;
    reply.mSc1 = crypto::aead_encrypt(cfg_.presharedKeyS, BytesView(inner.bytes().data(),
                                                                    inner.bytes().size()),
                                      BytesView{}, rng_);
    out.send(env.channel, cfg_.id, env.src, std::move(reply));
}

void SmartCard::handle_confirm(const wire::CardConfirm& m, const Envelope& env, Outbox& out) {
    if (!pending_.active) return reject(env, wire::RejectReason::NonceMismatch, out);

    auto pt = crypto::aead_decrypt(cfg_.presharedKeyS,
                                   BytesView(m.tokenCard.data(), m.tokenCard.size()), BytesView{});
    if (!pt) return reject(env, wire::RejectReason::CryptogramInvalid, out);
    if (pt->size() != kKeyBytes + 4 + 4 + kEntityIdBytes + kEntityIdBytes)
        return reject(env, wire::RejectReason::CryptogramInvalid, out);

    ByteReader r(BytesView(pt->data(), pt->size()));
    SymmetricKey sessionKey;
    sessionKey.raw = r.arr<kKeyBytes>();
    sessionKey.role = KeyRole::ShortTermReaderCard;
    Nonce nr{r.u32()}, nc{r.u32()};
    EntityId idR, idC;
    idR.raw = r.arr<kEntityIdBytes>();
    idC.raw = r.arr<kEntityIdBytes>();

    if (nc != pending_.cardNonce || nr != pending_.readerNonce || idR != pending_.readerId ||
        idC != cfg_.id)
        return reject(env, wire::RejectReason::NonceMismatch, out);

    auto macMsg = cat_u32({nr.value, nc.value});
    if (!crypto::mac_verify(sessionKey, BytesView(macMsg.data(), macMsg.size()), m.mac))
        return reject(env, wire::RejectReason::MacFailure, out);

    // Token accepted: persist across power-down so phase II can run later.
    flash_.valid = true;
    flash_.readerNonce = nr;
    flash_.cardNonce = nc;
    flash_.serverNonce = pending_.serverNonce;
    flash_.sessionKey = sessionKey;
    commandRound_ = 0;

    auto replyMsg = cat_u32({nr.plus(1).value, nc.plus(1).value});
    wire::CardConfirmReply reply;
    reply.mac = crypto::mac(sessionKey, BytesView(replyMsg.data(), replyMsg.size()));
    out.send(env.channel, cfg_.id, env.src, reply);
    pending_ = Pending{};
}

void SmartCard::handle_pin(const wire::PinVerify& m, const Envelope& env, Outbox& out) {
    if (!flash_.valid) return reject(env, wire::RejectReason::NonceMismatch, out);

    auto pt = crypto::aead_decrypt(flash_.sessionKey,
                                   BytesView(m.cryptogram.data(), m.cryptogram.size()), BytesView{});
    auto answer = [&](wire::PinStatus status, Bytes mSc2) {
        ByteWriter inner;
        inner.u8(static_cast<std::uint8_t>(status));
        inner.u32(flash_.readerNonce.value);
        inner.u32(flash_.cardNonce.value);
        wire::PinReply reply;
        reply.cryptogram = crypto::aead_encrypt(flash_.sessionKey,
                                                BytesView(inner.bytes().data(), inner.bytes().size()),
                                                BytesView{}, rng_);
        reply.mSc2 = std::move(mSc2);
        out.send(env.channel, cfg_.id, env.src, std::move(reply));
    };

    if (!pt || pt->size() != 4 + 4 + 4) return reject(env, wire::RejectReason::CryptogramInvalid, out);
    ByteReader r(BytesView(pt->data(), pt->size()));
    std::uint32_t pin = r.u32();
    Nonce nr{r.u32()}, nc{r.u32()};
    if (nr != flash_.readerNonce || nc != flash_.cardNonce)
        return answer(wire::PinStatus::NonceError, {});
    if (locked_) return answer(wire::PinStatus::Locked, {});

    if (pin_digest(cfg_.id, pin) != pinHash_) {
        if (++pinRetryCount_ >= cfg_.pinRetryLimit) locked_ = true;
        return answer(locked_ ? wire::PinStatus::Locked : wire::PinStatus::Mismatch, {});
    }

    pinRetryCount_ = 0;
    commandRound_ = 0;  // fresh user authentication opens a fresh command window
    ByteWriter inner;
    inner.u8(0x01);  // pin-ok
    inner.u32(flash_.cardNonce.value);
    inner.u32(flash_.serverNonce.value);
    Bytes mSc2 = crypto::aead_encrypt(cfg_.presharedKeyS,
                                      BytesView(inner.bytes().data(), inner.bytes().size()),
                                      BytesView{}, rng_);
    answer(wire::PinStatus::Ok, std::move(mSc2));
}

void SmartCard::handle_command(const wire::CommandToCard& m, const Envelope& env, Outbox& out) {
    if (!flash_.valid || locked_) return reject(env, wire::RejectReason::NonceMismatch, out);

    auto pt = crypto::aead_decrypt(flash_.sessionKey,
                                   BytesView(m.cryptogram.data(), m.cryptogram.size()), BytesView{});
    if (!pt || pt->size() != 4 + 4 + 4) return reject(env, wire::RejectReason::CryptogramInvalid, out);

    ByteReader r(BytesView(pt->data(), pt->size()));
    std::uint32_t cmdWord = r.u32();
    Nonce nr{r.u32()}, nc{r.u32()};

    // The card authenticates on its own nonce: the expected value advances
    // by one per signed command so a replayed request cannot re-sign.
    if (nc != flash_.cardNonce.plus(commandRound_))
        return reject(env, wire::RejectReason::NonceMismatch, out);
    if (!Command::from_word(cmdWord)) return reject(env, wire::RejectReason::CryptogramInvalid, out);

    ++commandRound_;
    auto payload = cat_u32({cmdWord, nr.value, nc.value});
    wire::CommandSignature reply;
    reply.sig = crypto::sign(cfg_.keyPair.priv, BytesView(payload.data(), payload.size()));
    out.send(env.channel, cfg_.id, env.src, reply);
}

}  // namespace imdsec::entities
