#include "imdsec/entities/reader.hpp"

#include "imdsec/puzzle.hpp"

namespace imdsec::entities {

namespace {

Bytes u32s(std::initializer_list<std::uint32_t> vals) {
    ByteWriter w;
    for (auto v : vals) w.u32(v);
    return w.take();
}

}  // namespace

const char* reader_kind_name(ReaderKind k) {
    switch (k) {
        case ReaderKind::Valid: return "valid";
        case ReaderKind::Stolen: return "stolen";
        case ReaderKind::Hacked: return "hacked";
        case ReaderKind::Forged: return "forged";
    }
    return "?";
}

Reader::Reader(const Config& cfg) : cfg_(cfg), rng_(cfg.rngSeed) {}

std::optional<std::int64_t> Reader::token_remaining_ms(SimTimeMs now) const {
    if (!tokens_.valid) return std::nullopt;
    return std::int64_t(tokens_.issuedAt) + tokens_.lifetimeMs - std::int64_t(now);
}

bool Reader::token_clock_ok(SimTimeMs now) const {
    // Strict: an operation exactly at T_L is already outside the window.
    return tokens_.valid && (now - tokens_.issuedAt) < tokens_.lifetimeMs;
}

void Reader::reset_pairing() {
    tokens_ = Tokens{};
    kRsValid_ = false;
    kRiValid_ = false;
    mSc2_.clear();
}

void Reader::fail(SimTimeMs now, const std::string& reason) {
    (void)now;
    if (outcome_.status == RunOutcome::Status::Pending) {
        outcome_.status = RunOutcome::Status::Failed;
        outcome_.failureReason = reason;
    }
    phase_ = Phase::Done;
    ++phaseGen_;
}

void Reader::succeed() {
    if (outcome_.status == RunOutcome::Status::Pending)
        outcome_.status = RunOutcome::Status::Success;
    phase_ = Phase::Done;
    ++phaseGen_;
}

void Reader::enter(Phase p, SimTimeMs now, Outbox& out) {
    phase_ = p;
    ++phaseGen_;
    if (p != Phase::Done && p != Phase::Idle)
        out.arm_timer(now + cfg_.phaseTimeoutMs, phaseGen_);
}

void Reader::on_timer(std::uint64_t tag, SimTimeMs now, Outbox& out) {
    (void)out;
    if (tag != phaseGen_ || phase_ == Phase::Done || phase_ == Phase::Idle) return;
    fail(now, "timeout");
}

void Reader::on_kick(SimTimeMs now, Outbox& out) {
    outcome_ = RunOutcome{};
    round_ = 0;
    commandIdx_ = 0;
    finishQueued_ = false;
    chunks_.clear();
    pinIdx_ = 0;
    kRiValid_ = false;

    switch (plan_.mode) {
        case RunPlan::Mode::Online:
            if (plan_.resumeWithTokens) {
                if (!tokens_.valid) return fail(now, "token-missing");
                send_pin(now, out);
                break;
            }
            begin_online(now, out);
            break;
        case RunPlan::Mode::Bedside:
            begin_online(now, out);
            break;
        case RunPlan::Mode::Offline:
            begin_offline(now, out);
            break;
    }
}

void Reader::begin_online(SimTimeMs now, Outbox& out) {
    helloNonce_ = Nonce{rng_.next_u32()};
    kRsValid_ = false;
    out.send(Channel::Internet, cfg_.id, cfg_.serverId, wire::ReaderHello{cfg_.id, helloNonce_});
    enter(Phase::AwaitServerHello, now, out);
}

void Reader::begin_offline(SimTimeMs now, Outbox& out) {
    if (plan_.noCard) {
        out.send(Channel::OOB, cfg_.id, cfg_.implantId, wire::OobAccessRequest{cfg_.id});
        enter(Phase::AwaitOobKey, now, out);
        return;
    }
    if (!tokens_.valid) return fail(now, "token-missing");
    if (!token_clock_ok(now)) return fail(now, "token-expired");
    send_pin(now, out);
}

void Reader::send_pin(SimTimeMs now, Outbox& out) {
    if (!token_clock_ok(now)) return fail(now, "token-expired");
    if (pinIdx_ >= plan_.pins.size()) return fail(now, "pin-rejected");

    ByteWriter inner;
    inner.u32(plan_.pins[pinIdx_]);
    inner.u32(tokens_.readerNonce.value);
    inner.u32(tokens_.cardNonce.value);
    wire::PinVerify msg;
    msg.cryptogram = crypto::aead_encrypt(tokens_.kRc,
                                          BytesView(inner.bytes().data(), inner.bytes().size()),
                                          BytesView{}, rng_);
    out.send(Channel::CardSlot, cfg_.id, cfg_.cardId, std::move(msg));
    enter(Phase::AwaitPinReply, now, out);
}

void Reader::on_message(const Envelope& env, SimTimeMs now, Outbox& out) {
    if (auto* m = std::get_if<wire::Reject>(&env.msg)) {
        if (phase_ != Phase::Done && phase_ != Phase::Idle)
            fail(now, std::string("rejected:") + wire::reject_reason_name(m->reason));
        return;
    }
    if (std::get_if<wire::AuthFail>(&env.msg)) {
        if (phase_ == Phase::AwaitKeyConfirm || phase_ == Phase::AwaitOfflineConfirmReply)
            fail(now, "implant-auth-fail");
        return;
    }
    if (auto* m = std::get_if<wire::PuzzleChallenge>(&env.msg)) {
        if (phase_ == Phase::AwaitServerHello) handle_puzzle(*m, now, out);
        return;
    }
    if (auto* m = std::get_if<wire::ServerHello>(&env.msg)) {
        if (phase_ == Phase::AwaitServerHello) handle_server_hello(*m, now, out);
        return;
    }
    if (auto* m = std::get_if<wire::DhResponse>(&env.msg)) {
        if (phase_ == Phase::AwaitDhResponse) handle_dh_response(*m, now, out);
        return;
    }
    if (auto* m = std::get_if<wire::CardAuthReply>(&env.msg)) {
        if (phase_ == Phase::AwaitCardReply) handle_card_reply(*m, now, out);
        return;
    }
    if (auto* m = std::get_if<wire::TokenResponse>(&env.msg)) {
        if (phase_ == Phase::AwaitTokens) handle_tokens(*m, now, out);
        return;
    }
    if (auto* m = std::get_if<wire::CardConfirmReply>(&env.msg)) {
        if (phase_ == Phase::AwaitCardConfirm) handle_card_confirm(*m, now, out);
        return;
    }
    if (auto* m = std::get_if<wire::PinReply>(&env.msg)) {
        if (phase_ == Phase::AwaitPinReply) handle_pin_reply(*m, now, out);
        return;
    }
    if (auto* m = std::get_if<wire::SessionHello>(&env.msg)) {
        if (phase_ == Phase::AwaitImplantHello) handle_session_hello(*m, now, out);
        return;
    }
    if (auto* m = std::get_if<wire::KeyResponse>(&env.msg)) {
        if (phase_ == Phase::AwaitKeyResponse) handle_key_response(*m, now, out);
        return;
    }
    if (auto* m = std::get_if<wire::KeyConfirmReply>(&env.msg)) {
        if (phase_ == Phase::AwaitKeyConfirm) handle_key_confirm_reply(*m, now, out);
        return;
    }
    if (auto* m = std::get_if<wire::OobKeyTransfer>(&env.msg)) {
        if (phase_ == Phase::AwaitOobKey && env.channel == Channel::OOB)
            handle_oob_key(*m, now, out);
        return;
    }
    if (auto* m = std::get_if<wire::OfflineConfirmReply>(&env.msg)) {
        if (phase_ == Phase::AwaitOfflineConfirmReply) handle_offline_confirm_reply(*m, now, out);
        return;
    }
    if (auto* m = std::get_if<wire::CommandSignature>(&env.msg)) {
        if (phase_ == Phase::AwaitSignature) handle_signature(*m, now, out);
        return;
    }
    if (auto* m = std::get_if<wire::CommandAnswer>(&env.msg)) {
        if (phase_ == Phase::AwaitAnswer) handle_answer(*m, now, out);
        return;
    }
    if (auto* m = std::get_if<wire::BedsideCommand>(&env.msg)) {
        if (phase_ == Phase::AwaitBedsideCommand) handle_bedside_command(*m, now, out);
        return;
    }
}

void Reader::handle_puzzle(const wire::PuzzleChallenge& m, SimTimeMs now, Outbox& out) {
    auto solved = puzzle::solve(m);
    if (!solved) return fail(now, "puzzle-unsolvable");
    wire::PuzzleResponse resp;
    resp.readerId = cfg_.id;
    resp.timestampMs = m.timestampMs;
    resp.difficulty = m.difficulty;
    resp.solution = solved->solution;
    out.send(Channel::Internet, cfg_.id, cfg_.serverId, std::move(resp));
    enter(Phase::AwaitServerHello, now, out);
}

void Reader::handle_server_hello(const wire::ServerHello& m, SimTimeMs now, Outbox& out) {
    serverNonce_ = m.serverNonce;
    dhEph_ = crypto::dh_generate(rng_);

    wire::DhInit init;
    init.certificate = cfg_.certificate.encode();
    init.ephemeral = dhEph_->keys.pub;
    ByteWriter transcript;
    transcript.raw(BytesView(dhEph_->keys.pub.raw.data(), dhEph_->keys.pub.raw.size()));
    transcript.u32(helloNonce_.value);
    transcript.u32(serverNonce_.value);
    init.bindingSig = crypto::sign(cfg_.keyPair.priv,
                                   BytesView(transcript.bytes().data(), transcript.bytes().size()));
    out.send(Channel::Internet, cfg_.id, cfg_.serverId, std::move(init));
    enter(Phase::AwaitDhResponse, now, out);
}

void Reader::handle_dh_response(const wire::DhResponse& m, SimTimeMs now, Outbox& out) {
    auto cert = Certificate::decode(BytesView(m.certificate.data(), m.certificate.size()));
    if (!cert || cert->subjectClass != EntityClass::Server || cert->subject != cfg_.serverId)
        return fail(now, "server-cert-invalid");
    auto certPayload = cert->signed_payload();
    if (!crypto::verify_sig(cfg_.caPublic, BytesView(certPayload.data(), certPayload.size()),
                            cert->signature))
        return fail(now, "server-cert-invalid");
    ByteWriter transcript;
    transcript.raw(BytesView(m.ephemeral.raw.data(), m.ephemeral.raw.size()));
    transcript.u32(serverNonce_.value);
    transcript.u32(helloNonce_.value);
    if (!crypto::verify_sig(cert->publicKey,
                            BytesView(transcript.bytes().data(), transcript.bytes().size()),
                            m.bindingSig))
        return fail(now, "server-dh-sig-invalid");

    auto key = crypto::dh_exchange(*dhEph_, m.ephemeral, helloNonce_, serverNonce_,
                                   KeyRole::ShortTermReaderServer);
    if (!key) return fail(now, "dh-group-element-invalid");
    kRs_ = *key;
    kRsValid_ = true;

    if (plan_.mode == RunPlan::Mode::Bedside) {
        begin_session_key(now, out);
        return;
    }
    if (cfg_.cardId.is_zero()) return fail(now, "no-card-inserted");
    out.send(Channel::CardSlot, cfg_.id, cfg_.cardId,
             wire::CardAuthInit{cfg_.id, helloNonce_, serverNonce_});
    enter(Phase::AwaitCardReply, now, out);
}

void Reader::handle_card_reply(const wire::CardAuthReply& m, SimTimeMs now, Outbox& out) {
    tokens_ = Tokens{};
    tokens_.cardId = m.cardId;
    tokens_.cardNonce = m.cardNonce;
    wire::TokenRequest req;
    req.readerId = cfg_.id;
    req.cardId = m.cardId;
    req.cardNonce = m.cardNonce;
    req.mSc1 = m.mSc1;
    out.send(Channel::Internet, cfg_.id, cfg_.serverId, std::move(req));
    enter(Phase::AwaitTokens, now, out);
}

void Reader::handle_tokens(const wire::TokenResponse& m, SimTimeMs now, Outbox& out) {
    auto pt = crypto::aead_decrypt(kRs_, BytesView(m.tokenReader.data(), m.tokenReader.size()),
                                   BytesView{});
    constexpr std::size_t kLen = kKeyBytes + 4 + 4 + kEntityIdBytes + kEntityIdBytes + 1 + 4;
    if (!pt || pt->size() != kLen) return fail(now, "token-invalid");
    ByteReader r(BytesView(pt->data(), pt->size()));
    SymmetricKey kRc;
    kRc.raw = r.arr<kKeyBytes>();
    kRc.role = KeyRole::ShortTermReaderCard;
    Nonce nR{r.u32()}, nC{r.u32()};
    EntityId idR, idC;
    idR.raw = r.arr<kEntityIdBytes>();
    idC.raw = r.arr<kEntityIdBytes>();
    auto priv = r.u8();
    std::uint32_t tl = r.u32();

    // The reader authenticates on its own nonce: a token minted from a
    // replayed m_SC1 carries a stale N_R and dies here.
    if (nR != helloNonce_) return fail(now, "token-nonce-mismatch");
    if (idR != cfg_.id || idC != tokens_.cardId || nC != tokens_.cardNonce || priv > 2)
        return fail(now, "token-binding-mismatch");

    tokens_.valid = true;
    tokens_.kRc = kRc;
    tokens_.readerNonce = helloNonce_;
    tokens_.privilege = static_cast<Privilege>(priv);
    tokens_.lifetimeMs = tl;
    tokens_.issuedAt = now;  // the real-time clock starts counting T_L

    auto macMsg = u32s({tokens_.readerNonce.value, tokens_.cardNonce.value});
    wire::CardConfirm confirm;
    confirm.mac = crypto::mac(kRc, BytesView(macMsg.data(), macMsg.size()));
    confirm.tokenCard = m.tokenCard;
    out.send(Channel::CardSlot, cfg_.id, cfg_.cardId, std::move(confirm));
    enter(Phase::AwaitCardConfirm, now, out);
}

void Reader::handle_card_confirm(const wire::CardConfirmReply& m, SimTimeMs now, Outbox& out) {
    auto macMsg = u32s({tokens_.readerNonce.plus(1).value, tokens_.cardNonce.plus(1).value});
    if (!crypto::mac_verify(tokens_.kRc, BytesView(macMsg.data(), macMsg.size()), m.mac))
        return fail(now, "card-confirm-mac-invalid");

    if (plan_.stopAfter == RunPlan::StopAfter::CardAuth) return succeed();
    send_pin(now, out);
}

void Reader::handle_pin_reply(const wire::PinReply& m, SimTimeMs now, Outbox& out) {
    auto pt = crypto::aead_decrypt(tokens_.kRc, BytesView(m.cryptogram.data(), m.cryptogram.size()),
                                   BytesView{});
    if (!pt || pt->size() != 1 + 4 + 4) return fail(now, "pin-reply-invalid");
    ByteReader r(BytesView(pt->data(), pt->size()));
    auto status = static_cast<wire::PinStatus>(r.u8());
    Nonce nR{r.u32()}, nC{r.u32()};
    if (nR != tokens_.readerNonce || nC != tokens_.cardNonce)
        return fail(now, "pin-reply-nonce-mismatch");

    switch (status) {
        case wire::PinStatus::Ok:
            break;
        case wire::PinStatus::Mismatch:
            ++pinIdx_;
            return send_pin(now, out);
        case wire::PinStatus::Locked:
            return fail(now, "card-locked");
        case wire::PinStatus::NonceError:
            return fail(now, "pin-reply-nonce-mismatch");
        default:
            return fail(now, "pin-reply-invalid");
    }

    mSc2_ = m.mSc2;
    if (plan_.stopAfter == RunPlan::StopAfter::UserAuth) return succeed();

    if (plan_.mode == RunPlan::Mode::Offline) {
        out.send(Channel::OOB, cfg_.id, cfg_.implantId, wire::OobAccessRequest{cfg_.id});
        enter(Phase::AwaitOobKey, now, out);
        return;
    }
    begin_session_key(now, out);
}

void Reader::begin_session_key(SimTimeMs now, Outbox& out) {
    sessionNonce_ = Nonce{rng_.next_u32()};
    out.send(Channel::RF, cfg_.id, cfg_.implantId, wire::SessionInit{cfg_.id, sessionNonce_});
    enter(Phase::AwaitImplantHello, now, out);
}

void Reader::handle_session_hello(const wire::SessionHello& m, SimTimeMs now, Outbox& out) {
    implantNonce_ = m.implantNonce;
    sessionImplantId_ = m.implantId;

    wire::KeyRequest req;
    req.readerId = cfg_.id;
    req.implantId = m.implantId;
    req.readerNonce = sessionNonce_;
    req.implantNonce = m.implantNonce;
    if (plan_.mode == RunPlan::Mode::Bedside) {
        req.bedside = 1;
    } else {
        req.bedside = 0;
        req.cardId = tokens_.cardId;
        req.mSc2 = mSc2_;
    }
    out.send(Channel::Internet, cfg_.id, cfg_.serverId, std::move(req));
    enter(Phase::AwaitKeyResponse, now, out);
}

void Reader::handle_key_response(const wire::KeyResponse& m, SimTimeMs now, Outbox& out) {
    auto pt = crypto::aead_decrypt(kRs_, BytesView(m.mReader.data(), m.mReader.size()), BytesView{});
    constexpr std::size_t kLen = kKeyBytes + 4 + 4 + kEntityIdBytes + 1;
    if (!pt || pt->size() != kLen) return fail(now, "m-reader-invalid");
    ByteReader r(BytesView(pt->data(), pt->size()));
    SymmetricKey kRi;
    kRi.raw = r.arr<kKeyBytes>();
    kRi.role = KeyRole::ShortTermReaderImplant;
    Nonce nR{r.u32()}, nI{r.u32()};
    EntityId idI;
    idI.raw = r.arr<kEntityIdBytes>();
    auto priv = r.u8();
    if (nR != sessionNonce_ || nI != implantNonce_ || idI != sessionImplantId_ || priv > 2)
        return fail(now, "m-reader-nonce-mismatch");

    kRi_ = kRi;
    kRiValid_ = true;
    granted_ = static_cast<Privilege>(priv);
    sessionMode_ = plan_.mode == RunPlan::Mode::Bedside ? wire::AccessMode::Bedside
                                                        : wire::AccessMode::OnlineCard;

    ByteWriter inner;
    inner.u32(sessionNonce_.value);
    inner.u32(implantNonce_.value);
    wire::KeyConfirm confirm;
    confirm.mImplant = m.mImplant;
    confirm.mRi = crypto::aead_encrypt(kRi_, BytesView(inner.bytes().data(), inner.bytes().size()),
                                       BytesView{}, rng_);
    out.send(Channel::RF, cfg_.id, cfg_.implantId, std::move(confirm));
    enter(Phase::AwaitKeyConfirm, now, out);
}

void Reader::handle_key_confirm_reply(const wire::KeyConfirmReply& m, SimTimeMs now, Outbox& out) {
    auto macMsg = u32s({implantNonce_.value, sessionNonce_.value});
    if (!crypto::mac_verify(kRi_, BytesView(macMsg.data(), macMsg.size()), m.mac))
        return fail(now, "key-confirm-mac-invalid");

    if (plan_.mode == RunPlan::Mode::Bedside) {
        ByteWriter inner;
        inner.raw(BytesView(sessionImplantId_.raw.data(), sessionImplantId_.raw.size()));
        inner.u32(sessionNonce_.value);
        inner.u32(implantNonce_.value);
        wire::BedsideReady ready;
        ready.cryptogram = crypto::aead_encrypt(kRs_,
                                                BytesView(inner.bytes().data(), inner.bytes().size()),
                                                BytesView{}, rng_);
        out.send(Channel::Internet, cfg_.id, cfg_.serverId, std::move(ready));
        enter(Phase::AwaitBedsideCommand, now, out);
        return;
    }
    main_phase_next(now, out);
}

void Reader::handle_oob_key(const wire::OobKeyTransfer& m, SimTimeMs now, Outbox& out) {
    kRi_ = m.sessionKey;
    kRiValid_ = true;
    implantNonce_ = m.implantNonce;
    sessionImplantId_ = m.implantId;
    sessionNonce_ = Nonce{rng_.next_u32()};
    sessionMode_ = wire::AccessMode::Offline;
    granted_ = plan_.noCard
                   ? Privilege::ReadWrite
                   : (tokens_.privilege < Privilege::ReadWrite ? tokens_.privilege
                                                               : Privilege::ReadWrite);

    wire::OfflineConfirm confirm;
    confirm.readerNonce = sessionNonce_;
    confirm.cardId = plan_.noCard ? EntityId{} : tokens_.cardId;
    confirm.cardNonce = plan_.noCard ? Nonce{} : tokens_.cardNonce;
    ByteWriter macMsg;
    macMsg.u32(sessionNonce_.value);
    macMsg.u32(implantNonce_.value);
    macMsg.raw(BytesView(confirm.cardId.raw.data(), confirm.cardId.raw.size()));
    macMsg.u32(confirm.cardNonce.value);
    confirm.mac = crypto::mac(kRi_, BytesView(macMsg.bytes().data(), macMsg.bytes().size()));
    out.send(Channel::RF, cfg_.id, cfg_.implantId, std::move(confirm));
    enter(Phase::AwaitOfflineConfirmReply, now, out);
}

void Reader::handle_offline_confirm_reply(const wire::OfflineConfirmReply& m, SimTimeMs now,
                                          Outbox& out) {
    auto macMsg = u32s({implantNonce_.plus(1).value, sessionNonce_.plus(1).value});
    if (!crypto::mac_verify(kRi_, BytesView(macMsg.data(), macMsg.size()), m.mac))
        return fail(now, "offline-confirm-mac-invalid");
    main_phase_next(now, out);
}

void Reader::main_phase_next(SimTimeMs now, Outbox& out) {
    Command cmd;
    if (commandIdx_ < plan_.commands.size()) {
        cmd = plan_.commands[commandIdx_];
    } else if (plan_.sendFinish && !finishQueued_) {
        cmd = Command{CommandKind::Finish, 0};
        finishQueued_ = true;
    } else {
        return succeed();
    }
    currentCommand_ = cmd;
    chunks_.clear();

    // Every token-dependent operation re-checks the real-time clock.
    if (sessionMode_ != wire::AccessMode::Bedside && !plan_.noCard && !token_clock_ok(now))
        return fail(now, "token-expired");

    if (plan_.noCard) {
        if (plan_.unsignedCommands) {
            // No-NR deployment: commands travel without signature material.
            ByteWriter inner;
            inner.u32(cmd.word());
            inner.u32(sessionNonce_.plus(round_).value);
            inner.u32(implantNonce_.plus(round_).value);
            wire::CommandToImplant msg;
            msg.authKind = wire::CommandAuthKind::None;
            msg.cryptogram = crypto::aead_encrypt(
                kRi_, BytesView(inner.bytes().data(), inner.bytes().size()), BytesView{}, rng_);
            out.send(Channel::RF, cfg_.id, cfg_.implantId, std::move(msg));
            enter(Phase::AwaitAnswer, now, out);
            return;
        }
        // Forged-reader offline path: fabricate a signature without any card.
        Signature bogus;
        rng_.fill(bogus.raw.data(), bogus.raw.size());
        return send_command_to_implant(cmd, bogus, now, out);
    }

    // Tamper hooks are one-shot: the attack targets a single command round.
    Command toSign = cmd;
    if (cfg_.hooks.signDecoyInstead) {
        toSign = *cfg_.hooks.signDecoyInstead;
        cfg_.hooks.signDecoyInstead.reset();
    }
    ByteWriter inner;
    inner.u32(toSign.word());
    inner.u32(sessionNonce_.plus(round_).value);
    inner.u32(tokens_.cardNonce.plus(round_).value);
    wire::CommandToCard msg;
    msg.cryptogram = crypto::aead_encrypt(tokens_.kRc,
                                          BytesView(inner.bytes().data(), inner.bytes().size()),
                                          BytesView{}, rng_);
    out.send(Channel::CardSlot, cfg_.id, cfg_.cardId, std::move(msg));
    enter(Phase::AwaitSignature, now, out);
}

void Reader::handle_signature(const wire::CommandSignature& m, SimTimeMs now, Outbox& out) {
    Command toSend = currentCommand_;
    if (cfg_.hooks.sendInstead) {
        toSend = *cfg_.hooks.sendInstead;
        cfg_.hooks.sendInstead.reset();
    }
    currentCommand_ = toSend;
    send_command_to_implant(toSend, m.sig, now, out);
}

void Reader::send_command_to_implant(const Command& cmd, const Signature& sig, SimTimeMs now,
                                     Outbox& out) {
    ByteWriter inner;
    inner.u32(cmd.word());
    inner.u32(sessionNonce_.plus(round_).value);
    inner.u32(implantNonce_.plus(round_).value);
    wire::CommandToImplant msg;
    msg.authKind = wire::CommandAuthKind::CardSignature;
    msg.auth.assign(sig.raw.begin(), sig.raw.end());
    // The signature rides as associated data: the implant never verifies it
    // (no public-key work there) but the session MAC still covers it, so a
    // tampered evidence blob dies before it reaches flash.
    msg.cryptogram = crypto::aead_encrypt(kRi_, BytesView(inner.bytes().data(), inner.bytes().size()),
                                          BytesView(msg.auth.data(), msg.auth.size()), rng_);
    out.send(Channel::RF, cfg_.id, cfg_.implantId, std::move(msg));
    enter(Phase::AwaitAnswer, now, out);
}

void Reader::handle_answer(const wire::CommandAnswer& m, SimTimeMs now, Outbox& out) {
    ByteWriter ad;
    ad.u32(m.chunkIndex);
    ad.u32(m.chunkCount);
    auto pt = crypto::aead_decrypt(kRi_, BytesView(m.cryptogram.data(), m.cryptogram.size()),
                                   BytesView(ad.bytes().data(), ad.bytes().size()));
    if (!pt || pt->size() < 8) return fail(now, "answer-invalid");

    ByteReader r(BytesView(pt->data(), pt->size()));
    Bytes payload = r.raw(pt->size() - 8);
    Nonce nI{r.u32()}, nR{r.u32()};
    if (nI != implantNonce_.plus(round_) || nR != sessionNonce_.plus(round_))
        return fail(now, "answer-nonce-mismatch");

    if (m.chunkIndex != chunks_.size()) return fail(now, "answer-chunk-order");
    chunks_.push_back(std::move(payload));

    if (sessionMode_ == wire::AccessMode::Bedside) {
        // Relay every chunk upstream under K'_RS.
        ByteWriter adUp;
        adUp.u32(m.chunkIndex);
        adUp.u32(m.chunkCount);
        wire::BedsideAnswer up;
        up.chunkIndex = m.chunkIndex;
        up.chunkCount = m.chunkCount;
        up.cryptogram = crypto::aead_encrypt(kRs_,
                                             BytesView(chunks_.back().data(), chunks_.back().size()),
                                             BytesView(adUp.bytes().data(), adUp.bytes().size()),
                                             rng_);
        // AD binds the chunk position; payload rides encrypted.
        out.send(Channel::Internet, cfg_.id, cfg_.serverId, std::move(up));
    }

    if (m.chunkIndex + 1 < m.chunkCount) {
        enter(Phase::AwaitAnswer, now, out);
        return;
    }

    Bytes whole;
    for (auto& c : chunks_) whole.insert(whole.end(), c.begin(), c.end());
    outcome_.answers.push_back(std::move(whole));
    chunks_.clear();
    ++round_;

    if (sessionMode_ == wire::AccessMode::Bedside) {
        if (bedsideCommand_.kind == CommandKind::Finish) {
            kRiValid_ = false;
            return succeed();
        }
        enter(Phase::AwaitBedsideCommand, now, out);
        return;
    }

    if (currentCommand_.kind == CommandKind::Finish) {
        kRiValid_ = false;  // session keys expire on the finish answer
        return succeed();
    }
    ++commandIdx_;
    main_phase_next(now, out);
}

void Reader::handle_bedside_command(const wire::BedsideCommand& m, SimTimeMs now, Outbox& out) {
    auto pt = crypto::aead_decrypt(kRs_, BytesView(m.cryptogram.data(), m.cryptogram.size()),
                                   BytesView{});
    if (!pt || pt->size() != 4 + 4 + 4 + kMacBytes) return fail(now, "bedside-command-invalid");
    ByteReader r(BytesView(pt->data(), pt->size()));
    auto cmd = Command::from_word(r.u32());
    Nonce nR{r.u32()}, nI{r.u32()};
    auto mac = r.arr<kMacBytes>();
    if (!cmd) return fail(now, "bedside-command-invalid");
    if (nR != sessionNonce_.plus(round_) || nI != implantNonce_.plus(round_))
        return fail(now, "bedside-round-mismatch");

    bedsideCommand_ = *cmd;
    bedsideServerMac_ = mac;
    currentCommand_ = *cmd;
    chunks_.clear();

    ByteWriter inner;
    inner.u32(cmd->word());
    inner.u32(nR.value);
    inner.u32(nI.value);
    wire::CommandToImplant msg;
    msg.authKind = wire::CommandAuthKind::ServerMac;
    msg.auth.assign(mac.begin(), mac.end());
    msg.cryptogram = crypto::aead_encrypt(kRi_, BytesView(inner.bytes().data(), inner.bytes().size()),
                                          BytesView(msg.auth.data(), msg.auth.size()), rng_);
    out.send(Channel::RF, cfg_.id, cfg_.implantId, std::move(msg));
    enter(Phase::AwaitAnswer, now, out);
}

}  // namespace imdsec::entities
