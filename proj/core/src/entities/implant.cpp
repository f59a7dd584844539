#include "imdsec/entities/implant.hpp"

namespace imdsec::entities {

namespace {

Bytes mac_nonces(Nonce a, Nonce b) {
    ByteWriter w;
    w.u32(a.value);
    w.u32(b.value);
    return w.take();
}

}  // namespace

Implant::Implant(const Config& cfg, const energy::CostTable& table)
    : cfg_(cfg),
      table_(table),
      rng_(cfg.rngSeed),
      ledger_(cfg.batteryCapacityJ, cfg.zpdEnabled),
      flash_(cfg.flashCapacityBytes) {}

std::optional<Implant::SessionView> Implant::session_view() const {
    if (!session_) return std::nullopt;
    return SessionView{session_->readerNonce, session_->implantNonce, session_->granted,
                       session_->mode, session_->round};
}

bool Implant::charge_rx(energy::StepKind step, const wire::Message& m, bool preAuth, double blocks,
                        double rngCalls, bool sessionStart, Channel ch) {
    energy::StepCharge c;
    c.kind = (ch == Channel::OOB) ? energy::StepKind::OobRecv : step;
    c.rxBits = static_cast<double>(wire::encode_frame(m).size()) * 8.0;
    c.cryptoBlocks = blocks;
    c.rngCalls = rngCalls;
    c.radioSessionStart = sessionStart;
    return ledger_.charge(c.kind, energy::step_energy_uj(table_, cfg_.implClass, c), preAuth);
}

bool Implant::charge_tx(energy::StepKind step, const wire::Message& m, bool preAuth, double blocks,
                        Channel ch) {
    energy::StepCharge c;
    c.kind = (ch == Channel::OOB) ? energy::StepKind::OobSend : step;
    c.txBits = static_cast<double>(wire::encode_frame(m).size()) * 8.0;
    c.cryptoBlocks = blocks;
    return ledger_.charge(c.kind, energy::step_energy_uj(table_, cfg_.implClass, c), preAuth);
}

void Implant::reject(const Envelope& env, wire::RejectReason r, Outbox& out) {
    out.send(env.channel, cfg_.id, env.src, wire::Reject{r});
}

void Implant::expire_if_stale(SimTimeMs now) {
    if (session_ && session_->established &&
        now - session_->lastActivity > cfg_.sessionTimeoutMs) {
        session_.reset();
    }
}

void Implant::on_message(const Envelope& env, SimTimeMs now, Outbox& out) {
    expire_if_stale(now);
    if (auto* m = std::get_if<wire::SessionInit>(&env.msg))
        return handle_session_init(*m, env, now, out);
    if (auto* m = std::get_if<wire::KeyConfirm>(&env.msg))
        return handle_key_confirm(*m, env, now, out);
    if (auto* m = std::get_if<wire::CommandToImplant>(&env.msg))
        return handle_command(*m, env, now, out);
    if (auto* m = std::get_if<wire::OobAccessRequest>(&env.msg))
        return handle_oob_request(*m, env, now, out);
    if (auto* m = std::get_if<wire::OfflineConfirm>(&env.msg))
        return handle_offline_confirm(*m, env, now, out);
}

void Implant::handle_session_init(const wire::SessionInit& m, const Envelope& env, SimTimeMs now,
                                  Outbox& out) {
    if (env.channel != Channel::RF) return;
    if (session_ && session_->established) return reject(env, wire::RejectReason::Busy, out);

    // One authentication window's worth of harvested RF energy becomes
    // available per attempt; the whole pre-auth pipeline fits inside it.
    ledger_.begin_harvest_window(energy::auth_energy_uj(table_, cfg_.implClass));
    if (!charge_rx(energy::StepKind::SkRecvInit, env.msg, true, 0, 1, true, env.channel)) return;

    Session s;
    s.readerId = m.readerId;
    s.readerNonce = m.readerNonce;
    s.implantNonce = Nonce{rng_.next_u32()};
    s.lastActivity = now;
    session_ = s;

    wire::SessionHello reply{cfg_.id, session_->implantNonce};
    charge_tx(energy::StepKind::SkSendHello, wire::Message{reply}, true, 0, env.channel);
    out.send(env.channel, cfg_.id, env.src, reply);
}

void Implant::send_auth_fail(const Envelope& env, Nonce readerNonce, Outbox& out) {
    ByteWriter w;
    w.u32(readerNonce.value);
    w.raw(to_bytes("FAIL"));
    wire::AuthFail fail;
    fail.mac = crypto::mac(cfg_.presharedKeyS, BytesView(w.bytes().data(), w.bytes().size()));
    charge_tx(energy::StepKind::AuthFailNotice, wire::Message{fail}, true,
              energy::mac_block_count(8), env.channel);
    out.send(env.channel, cfg_.id, env.src, fail);
}

void Implant::handle_key_confirm(const wire::KeyConfirm& m, const Envelope& env, SimTimeMs now,
                                 Outbox& out) {
    if (env.channel != Channel::RF) return;
    if (!session_ || session_->established || session_->mode == wire::AccessMode::Offline) return;

    const double blocks =
        energy::aead_block_count(
            std::max<double>(0.0, double(m.mImplant.size()) - crypto::kAeadOverhead), 0) +
        energy::aead_block_count(
            std::max<double>(0.0, double(m.mRi.size()) - crypto::kAeadOverhead), 0);
    if (!charge_rx(energy::StepKind::SkRecvKeys, env.msg, true, blocks, 0, false, env.channel))
        return;

    auto fail = [&](Nonce nr) {
        send_auth_fail(env, nr, out);
        session_.reset();
    };

    auto pt = crypto::aead_decrypt(cfg_.presharedKeyS,
                                   BytesView(m.mImplant.data(), m.mImplant.size()), BytesView{});
    constexpr std::size_t kMImplantLen =
        kKeyBytes + 4 + 4 + kEntityIdBytes + kEntityIdBytes + 4 + 1 + 1;
    if (!pt || pt->size() != kMImplantLen) return fail(session_->readerNonce);

    ByteReader r(BytesView(pt->data(), pt->size()));
    SymmetricKey sessionKey;
    sessionKey.raw = r.arr<kKeyBytes>();
    sessionKey.role = KeyRole::ShortTermReaderImplant;
    Nonce nr{r.u32()}, ni{r.u32()};
    EntityId idR, idC;
    idR.raw = r.arr<kEntityIdBytes>();
    idC.raw = r.arr<kEntityIdBytes>();
    Nonce nc{r.u32()};
    auto privRaw = r.u8();
    auto modeRaw = r.u8();
    if (privRaw > 2 || modeRaw > 2) return fail(session_->readerNonce);

    // The implant authenticates the run on its own fresh nonce.
    if (ni != session_->implantNonce || nr != session_->readerNonce || idR != session_->readerId)
        return fail(session_->readerNonce);

    auto ptRi = crypto::aead_decrypt(sessionKey, BytesView(m.mRi.data(), m.mRi.size()), BytesView{});
    if (!ptRi || ptRi->size() != 8) return fail(session_->readerNonce);
    ByteReader r2(BytesView(ptRi->data(), ptRi->size()));
    if (Nonce{r2.u32()} != nr || Nonce{r2.u32()} != ni) return fail(session_->readerNonce);

    session_->key = sessionKey;
    session_->cardId = idC;
    session_->cardNonce = nc;
    session_->granted = static_cast<Privilege>(privRaw);
    session_->mode = static_cast<wire::AccessMode>(modeRaw);
    session_->lastActivity = now;

    wire::KeyConfirmReply reply;
    auto macMsg = mac_nonces(ni, nr);
    reply.mac = crypto::mac(sessionKey, BytesView(macMsg.data(), macMsg.size()));
    charge_tx(energy::StepKind::SkSendConfirm, wire::Message{reply}, true,
              energy::mac_block_count(8), env.channel);
    session_->established = true;  // battery power from here on
    lastEstablished_ = session_view();
    lastSessionKey_ = session_->key;
    out.send(env.channel, cfg_.id, env.src, reply);
}

void Implant::handle_oob_request(const wire::OobAccessRequest& m, const Envelope& env,
                                 SimTimeMs now, Outbox& out) {
    // The touch channel is the offline trust root; requests arriving over
    // RF never arm an offline session.
    if (env.channel != Channel::OOB || !cfg_.oobArmed) return;
    if (session_ && session_->established) return;

    ledger_.begin_harvest_window(energy::auth_energy_uj(table_, cfg_.implClass));
    charge_rx(energy::StepKind::OobRecv, env.msg, true, 0, 2, false, env.channel);

    Session s;
    s.readerId = m.readerId;
    s.implantNonce = Nonce{rng_.next_u32()};
    SymmetricKey key;
    rng_.fill(key.raw.data(), key.raw.size());
    key.role = KeyRole::ShortTermReaderImplant;
    s.key = key;
    s.mode = wire::AccessMode::Offline;
    s.granted = Privilege::ReadWrite;  // paramedic ceiling; never firmware
    s.lastActivity = now;
    session_ = s;

    wire::OobKeyTransfer reply{cfg_.id, s.implantNonce, key};
    charge_tx(energy::StepKind::OobSend, wire::Message{reply}, true, 0, env.channel);
    out.send(Channel::OOB, cfg_.id, env.src, reply);
}

void Implant::handle_offline_confirm(const wire::OfflineConfirm& m, const Envelope& env,
                                     SimTimeMs now, Outbox& out) {
    if (env.channel != Channel::RF) return;
    if (!session_ || session_->established || session_->mode != wire::AccessMode::Offline) return;

    charge_rx(energy::StepKind::SkRecvKeys, env.msg, true, energy::mac_block_count(24), 0, false,
              env.channel);

    ByteWriter w;
    w.u32(m.readerNonce.value);
    w.u32(session_->implantNonce.value);
    w.raw(BytesView(m.cardId.raw.data(), m.cardId.raw.size()));
    w.u32(m.cardNonce.value);
    if (!crypto::mac_verify(session_->key, BytesView(w.bytes().data(), w.bytes().size()), m.mac)) {
        send_auth_fail(env, m.readerNonce, out);
        session_.reset();
        return;
    }

    session_->readerNonce = m.readerNonce;
    session_->cardId = m.cardId;
    session_->cardNonce = m.cardNonce;
    session_->lastActivity = now;

    wire::OfflineConfirmReply reply;
    auto macMsg = mac_nonces(session_->implantNonce.plus(1), m.readerNonce.plus(1));
    reply.mac = crypto::mac(session_->key, BytesView(macMsg.data(), macMsg.size()));
    charge_tx(energy::StepKind::SkSendConfirm, wire::Message{reply}, true,
              energy::mac_block_count(8), env.channel);
    session_->established = true;
    lastEstablished_ = session_view();
    lastSessionKey_ = session_->key;
    out.send(env.channel, cfg_.id, env.src, reply);
}

Bytes Implant::answer_payload(const Command& cmd) {
    std::size_t len = kAnswerBytes;
    if (cmd.kind == CommandKind::ReadStatus && cfg_.readStatusAnsBytes > kAnswerBytes)
        len = cfg_.readStatusAnsBytes;

    Bytes out(len, 0);
    ByteWriter w;
    w.u8(static_cast<std::uint8_t>(cmd.kind));
    w.u8(suspended_ ? 1 : 0);
    w.u16(static_cast<std::uint16_t>(firmwareVersion_));
    w.u32(therapySetting_);
    const auto& head = w.bytes();
    for (std::size_t i = 0; i < 8 && i < len; ++i) out[i] = head[i];
    // Log-style filler for bulk reads, keyed by a running counter.
    for (std::size_t i = 8; i < len; ++i)
        out[i] = static_cast<std::uint8_t>((statusCounter_ + i) * 31 + 7);
    ++statusCounter_;
    return out;
}

void Implant::execute(const Command& cmd) {
    switch (cmd.kind) {
        case CommandKind::ReadStatus: break;
        case CommandKind::WriteTherapy: therapySetting_ = cmd.payload; break;
        case CommandKind::Suspend: suspended_ = true; break;
        case CommandKind::Resume: suspended_ = false; break;
        case CommandKind::FirmwareUpdate: ++firmwareVersion_; break;
        case CommandKind::Finish: break;
    }
    ++executedCommands_;
}

void Implant::handle_command(const wire::CommandToImplant& m, const Envelope& env, SimTimeMs now,
                             Outbox& out) {
    if (env.channel != Channel::RF) return;
    if (!session_ || !session_->established)
        return reject(env, wire::RejectReason::SessionExpired, out);

    const double blocks = energy::aead_block_count(
        std::max<double>(0.0, double(m.cryptogram.size()) - crypto::kAeadOverhead),
        double(m.auth.size()));
    charge_rx(energy::StepKind::CmdRecv, env.msg, false, blocks, 0, false, env.channel);

    // The auth material (signature or server MAC) is bound as associated
    // data, so any in-flight tampering of it voids the whole frame.
    auto pt = crypto::aead_decrypt(session_->key,
                                   BytesView(m.cryptogram.data(), m.cryptogram.size()),
                                   BytesView(m.auth.data(), m.auth.size()));
    if (!pt || pt->size() != 12) return reject(env, wire::RejectReason::CryptogramInvalid, out);

    ByteReader r(BytesView(pt->data(), pt->size()));
    auto cmd = Command::from_word(r.u32());
    Nonce nr{r.u32()}, ni{r.u32()};
    if (!cmd) return reject(env, wire::RejectReason::CryptogramInvalid, out);

    const std::uint32_t round = session_->round;
    if (nr != session_->readerNonce.plus(round) || ni != session_->implantNonce.plus(round))
        return reject(env, wire::RejectReason::NonceMismatch, out);

    // Access control: the granted privilege from m_I (or the offline
    // paramedic ceiling) bounds every executed command.
    if (!(required_privilege(cmd->kind) <= session_->granted))
        return reject(env, wire::RejectReason::PrivilegeViolation, out);

    switch (session_->mode) {
        case wire::AccessMode::Bedside: {
            if (m.authKind != wire::CommandAuthKind::ServerMac)
                return reject(env, wire::RejectReason::MacFailure, out);
            ByteWriter w;
            w.u32(cmd->word());
            w.u32(nr.value);
            w.u32(ni.value);
            wire::MacTag tag{};
            std::copy(m.auth.begin(), m.auth.end(), tag.begin());
            if (!crypto::mac_verify(cfg_.presharedKeyS, BytesView(w.bytes().data(), w.bytes().size()),
                                    tag))
                return reject(env, wire::RejectReason::MacFailure, out);
            break;
        }
        case wire::AccessMode::OnlineCard:
            // R has already MAC-verified the card; the implant only needs
            // the signature bytes for its evidence store.
            if (m.authKind != wire::CommandAuthKind::CardSignature)
                return reject(env, wire::RejectReason::MacFailure, out);
            break;
        case wire::AccessMode::Offline:
            if (cfg_.nrOfflineRequired && m.authKind != wire::CommandAuthKind::CardSignature)
                return reject(env, wire::RejectReason::MacFailure, out);
            break;
    }

    if (is_write_command(cmd->kind) && m.authKind == wire::CommandAuthKind::CardSignature) {
        SignatureRecord rec;
        std::copy(m.auth.begin(), m.auth.end(), rec.sig.raw.begin());
        rec.cmd = *cmd;
        rec.cardId = session_->cardId;
        rec.cardNonce = session_->cardNonce.plus(round);
        rec.readerNonce = nr;
        energy::StepCharge fc;
        fc.kind = energy::StepKind::RecordStore;
        fc.flashBytes = SignatureRecord::kEncodedBytes;
        ledger_.charge(fc.kind, energy::step_energy_uj(table_, cfg_.implClass, fc), false);
        flash_.store(rec);
    }

    energy::StepCharge ec;
    ec.kind = energy::StepKind::CmdExecute;
    ledger_.charge(ec.kind, energy::step_energy_uj(table_, cfg_.implClass, ec), false);
    executedLog_.emplace_back(*cmd, session_->granted);
    execute(*cmd);

    Bytes ans = answer_payload(*cmd);
    const std::size_t chunkBytes = cfg_.answerChunkBytes;
    const std::uint32_t chunkCount =
        static_cast<std::uint32_t>((ans.size() + chunkBytes - 1) / chunkBytes);
    for (std::uint32_t i = 0; i < chunkCount; ++i) {
        std::size_t off = std::size_t(i) * chunkBytes;
        std::size_t n = std::min(chunkBytes, ans.size() - off);

        ByteWriter inner;
        inner.raw(BytesView(ans.data() + off, n));
        inner.u32(ni.value);
        inner.u32(nr.value);
        ByteWriter ad;
        ad.u32(i);
        ad.u32(chunkCount);

        wire::CommandAnswer chunk;
        chunk.chunkIndex = i;
        chunk.chunkCount = chunkCount;
        chunk.cryptogram = crypto::aead_encrypt(session_->key,
                                                BytesView(inner.bytes().data(), inner.bytes().size()),
                                                BytesView(ad.bytes().data(), ad.bytes().size()),
                                                rng_);
        charge_tx(energy::StepKind::AnsSend, wire::Message{chunk}, false,
                  energy::aead_block_count(double(n + 8), 8), env.channel);
        out.send(env.channel, cfg_.id, env.src, std::move(chunk));
    }

    session_->lastActivity = now;
    ++session_->round;
    if (cmd->kind == CommandKind::Finish) session_.reset();
}

}  // namespace imdsec::entities
