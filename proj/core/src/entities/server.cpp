#include "imdsec/entities/server.hpp"

namespace imdsec::entities {

namespace {

Bytes dh_transcript(const PublicKey& eph, Nonce first, Nonce second) {
    ByteWriter w;
    w.raw(BytesView(eph.raw.data(), eph.raw.size()));
    w.u32(first.value);
    w.u32(second.value);
    return w.take();
}

constexpr std::size_t kLinkPayloadLen =
    kKeyBytes + 4 + 4 + kEntityIdBytes + kEntityIdBytes + 4 + 1 + 1;

}  // namespace

HospitalServer::HospitalServer(const Config& cfg) : cfg_(cfg), rng_(cfg.rngSeed) {}

void HospitalServer::register_implant(const EntityId& id, const SymmetricKey& kSi) {
    registeredImplants_[id] = kSi;
}
void HospitalServer::register_card(const EntityId& id, const SymmetricKey& kSc) {
    registeredCards_[id] = kSc;
}
void HospitalServer::add_server_link(const EntityId& peer, const SymmetricKey& key) {
    serverLinks_[peer] = key;
}
void HospitalServer::set_reader_zone(const EntityId& readerId, bool inHospital) {
    conns_[readerId].inHospitalZone = inHospital;
}

const std::vector<Bytes>& HospitalServer::retrieved_logs(const EntityId& implantId) const {
    static const std::vector<Bytes> kEmpty;
    auto it = retrievedLogs_.find(implantId);
    return it == retrievedLogs_.end() ? kEmpty : it->second;
}

bool HospitalServer::bedside_finished(const EntityId& readerId) const {
    auto it = conns_.find(readerId);
    return it != conns_.end() && it->second.bedside.finished;
}

bool HospitalServer::within_working_hours(SimTimeMs now) const {
    int hour = static_cast<int>((now / 3600000) % 24);
    return hour >= cfg_.workStartHour && hour < cfg_.workEndHour;
}

void HospitalServer::reject(const Envelope& env, wire::RejectReason r, Outbox& out) {
    out.send(env.channel, cfg_.id, env.src, wire::Reject{r});
}

void HospitalServer::on_message(const Envelope& env, SimTimeMs now, Outbox& out) {
    if (auto* m = std::get_if<wire::ReaderHello>(&env.msg)) return handle_hello(*m, env, now, out);
    if (auto* m = std::get_if<wire::PuzzleResponse>(&env.msg))
        return handle_puzzle_response(*m, env, now, out);
    if (auto* m = std::get_if<wire::DhInit>(&env.msg)) return handle_dh_init(*m, env, out);
    if (auto* m = std::get_if<wire::TokenRequest>(&env.msg))
        return handle_token_request(*m, env, out);
    if (auto* m = std::get_if<wire::KeyRequest>(&env.msg))
        return handle_key_request(*m, env, now, out);
    if (auto* m = std::get_if<wire::BedsideReady>(&env.msg))
        return handle_bedside_ready(*m, env, out);
    if (auto* m = std::get_if<wire::BedsideAnswer>(&env.msg))
        return handle_bedside_answer(*m, env, out);
    if (auto* m = std::get_if<wire::RemoteKeyForward>(&env.msg))
        return handle_remote_forward(*m, env, out);
    if (auto* m = std::get_if<wire::RemoteKeyReply>(&env.msg))
        return handle_remote_reply(*m, env, out);
    if (auto* m = std::get_if<wire::RemoteFail>(&env.msg)) return handle_remote_fail(*m, env, out);
}

void HospitalServer::send_server_hello(const EntityId& dst, Conn& conn, Outbox& out) {
    conn.serverNonce = Nonce{rng_.next_u32()};
    conn.puzzlePassed = true;
    out.send(Channel::Internet, cfg_.id, dst, wire::ServerHello{cfg_.id, conn.serverNonce});
}

void HospitalServer::handle_hello(const wire::ReaderHello& m, const Envelope& env, SimTimeMs now,
                                  Outbox& out) {
    auto& conn = conns_[m.readerId];
    if (!conn.helloSeen) ++loadLevel_;
    conn.helloSeen = true;
    conn.readerNonce = m.readerNonce;
    conn.secure = false;
    conn.card = CardContext{};

    if (cpp_active()) {
        ++puzzlesIssued_;
        auto challenge = puzzle::issue(m.readerId, now, cfg_.longTermSecret, cfg_.puzzleDifficulty);
        out.send(Channel::Internet, cfg_.id, env.src, challenge);
        return;
    }
    send_server_hello(env.src, conn, out);
}

void HospitalServer::handle_puzzle_response(const wire::PuzzleResponse& m, const Envelope& env,
                                            SimTimeMs now, Outbox& out) {
    auto it = conns_.find(m.readerId);
    if (it == conns_.end()) return reject(env, wire::RejectReason::PuzzleWrongSolution, out);

    // Stateless verification: x is recomputed from (ID_R, t, K_S).
    auto result = puzzle::verify(m.readerId, m.timestampMs, m.difficulty,
                                 BytesView(m.solution.data(), m.solution.size()),
                                 cfg_.longTermSecret, now, cfg_.puzzleExpiryMs);
    if (result == puzzle::VerifyResult::Expired)
        return reject(env, wire::RejectReason::PuzzleExpired, out);
    if (result == puzzle::VerifyResult::WrongSolution)
        return reject(env, wire::RejectReason::PuzzleWrongSolution, out);
    send_server_hello(env.src, it->second, out);
}

void HospitalServer::handle_dh_init(const wire::DhInit& m, const Envelope& env, Outbox& out) {
    auto it = conns_.find(env.src);
    if (it == conns_.end() || !it->second.puzzlePassed)
        return reject(env, wire::RejectReason::NonceMismatch, out);
    auto& conn = it->second;

    auto cert = Certificate::decode(BytesView(m.certificate.data(), m.certificate.size()));
    if (!cert || cert->subjectClass != EntityClass::Reader ||
        !crypto::verify_sig(cfg_.caPublic, BytesView(cert->signed_payload().data(),
                                                     cert->signed_payload().size()),
                            cert->signature))
        return reject(env, wire::RejectReason::CertInvalid, out);
    if (crl_.count(cert->subject)) return reject(env, wire::RejectReason::CertRevoked, out);
    if (!crypto::p192::on_curve(m.ephemeral))
        return reject(env, wire::RejectReason::GroupElementInvalid, out);

    auto transcript = dh_transcript(m.ephemeral, conn.readerNonce, conn.serverNonce);
    if (!crypto::verify_sig(cert->publicKey, BytesView(transcript.data(), transcript.size()),
                            m.bindingSig))
        return reject(env, wire::RejectReason::MacFailure, out);

    auto eph = crypto::dh_generate(rng_);
    auto key = crypto::dh_exchange(eph, m.ephemeral, conn.readerNonce, conn.serverNonce,
                                   KeyRole::ShortTermReaderServer);
    if (!key) return reject(env, wire::RejectReason::GroupElementInvalid, out);
    conn.kRs = *key;
    conn.secure = true;

    wire::DhResponse resp;
    resp.certificate = cfg_.certificate.encode();
    resp.ephemeral = eph.keys.pub;
    auto respTranscript = dh_transcript(eph.keys.pub, conn.serverNonce, conn.readerNonce);
    resp.bindingSig =
        crypto::sign(cfg_.keyPair.priv, BytesView(respTranscript.data(), respTranscript.size()));
    out.send(Channel::Internet, cfg_.id, env.src, std::move(resp));
}

void HospitalServer::handle_token_request(const wire::TokenRequest& m, const Envelope& env,
                                          Outbox& out) {
    auto it = conns_.find(m.readerId);
    if (it == conns_.end() || !it->second.secure)
        return reject(env, wire::RejectReason::NonceMismatch, out);
    auto& conn = it->second;

    auto cardKey = registeredCards_.find(m.cardId);
    if (cardKey == registeredCards_.end()) return reject(env, wire::RejectReason::CardUnknown, out);

    auto pt = crypto::aead_decrypt(cardKey->second, BytesView(m.mSc1.data(), m.mSc1.size()),
                                   BytesView{});
    if (!pt || pt->size() != Certificate::kEncodedSize + kEntityIdBytes + 4 + 4 + 4)
        return reject(env, wire::RejectReason::CryptogramInvalid, out);

    ByteReader r(BytesView(pt->data(), pt->size()));
    auto certBytes = r.raw(Certificate::kEncodedSize);
    EntityId idR;
    idR.raw = r.arr<kEntityIdBytes>();
    Nonce nR{r.u32()}, nS{r.u32()}, nC{r.u32()};

    // The server's authentication basis is its own nonce N_S; the reader
    // and card each check theirs via the tokens.
    if (nS != conn.serverNonce || idR != m.readerId || nC != m.cardNonce)
        return reject(env, wire::RejectReason::NonceMismatch, out);

    auto cert = Certificate::decode(BytesView(certBytes.data(), certBytes.size()));
    if (!cert || cert->subject != m.cardId || cert->subjectClass != EntityClass::Card ||
        !crypto::verify_sig(cfg_.caPublic, BytesView(cert->signed_payload().data(),
                                                     cert->signed_payload().size()),
                            cert->signature))
        return reject(env, wire::RejectReason::CertInvalid, out);
    if (crl_.count(cert->subject)) return reject(env, wire::RejectReason::CardRevoked, out);

    SymmetricKey kRc;
    rng_.fill(kRc.raw.data(), kRc.raw.size());
    kRc.role = KeyRole::ShortTermReaderCard;

    conn.card.valid = true;
    conn.card.cardId = m.cardId;
    conn.card.cardNonce = nC;
    conn.card.privilege = cert->privileges;
    conn.card.kRc = kRc;

    wire::TokenResponse resp;
    {
        ByteWriter inner;
        inner.raw(BytesView(kRc.raw.data(), kRc.raw.size()));
        inner.u32(nR.value);
        inner.u32(nC.value);
        inner.raw(BytesView(idR.raw.data(), idR.raw.size()));
        inner.raw(BytesView(m.cardId.raw.data(), m.cardId.raw.size()));
        inner.u8(static_cast<std::uint8_t>(cert->privileges));
        inner.u32(cfg_.tokenLifetimeMs);
        resp.tokenReader = crypto::aead_encrypt(conn.kRs,
                                                BytesView(inner.bytes().data(), inner.bytes().size()),
                                                BytesView{}, rng_);
    }
    {
        ByteWriter inner;
        inner.raw(BytesView(kRc.raw.data(), kRc.raw.size()));
        inner.u32(nR.value);
        inner.u32(nC.value);
        inner.raw(BytesView(idR.raw.data(), idR.raw.size()));
        inner.raw(BytesView(m.cardId.raw.data(), m.cardId.raw.size()));
        resp.tokenCard = crypto::aead_encrypt(cardKey->second,
                                              BytesView(inner.bytes().data(), inner.bytes().size()),
                                              BytesView{}, rng_);
    }
    out.send(Channel::Internet, cfg_.id, env.src, std::move(resp));
}

void HospitalServer::handle_key_request(const wire::KeyRequest& m, const Envelope& env,
                                        SimTimeMs now, Outbox& out) {
    auto it = conns_.find(m.readerId);
    if (it == conns_.end() || !it->second.secure)
        return reject(env, wire::RejectReason::NonceMismatch, out);
    auto& conn = it->second;

    Privilege granted = Privilege::ReadOnly;
    EntityId cardId{};
    Nonce cardNonce{};
    wire::AccessMode mode = wire::AccessMode::Bedside;

    if (m.bedside == 0) {
        mode = wire::AccessMode::OnlineCard;
        if (!conn.card.valid || conn.card.cardId != m.cardId)
            return reject(env, wire::RejectReason::NonceMismatch, out);

        auto cardKey = registeredCards_.find(m.cardId);
        if (cardKey == registeredCards_.end())
            return reject(env, wire::RejectReason::CardUnknown, out);
        auto pt = crypto::aead_decrypt(cardKey->second, BytesView(m.mSc2.data(), m.mSc2.size()),
                                       BytesView{});
        if (!pt || pt->size() != 1 + 4 + 4 || (*pt)[0] != 0x01)
            return reject(env, wire::RejectReason::CryptogramInvalid, out);
        ByteReader r(BytesView(pt->data(), pt->size()));
        r.u8();
        Nonce nC{r.u32()}, nS{r.u32()};
        if (nC != conn.card.cardNonce || nS != conn.serverNonce)
            return reject(env, wire::RejectReason::NonceMismatch, out);

        // m_SC2 is single-use: a second establishment citing the same
        // cryptogram is a replay.
        auto fingerprint = to_hex(BytesView(m.mSc2.data(), m.mSc2.size()));
        if (!usedMSc2_.insert(fingerprint).second)
            return reject(env, wire::RejectReason::CryptogramReused, out);

        granted = conn.card.privilege;
        cardId = conn.card.cardId;
        cardNonce = conn.card.cardNonce;

        // Non-repudiation gap closure: write access only from inside the
        // hospital network and during the user's working hours; otherwise
        // the grant degrades to read-only.
        if (granted > Privilege::ReadOnly &&
            (!conn.inHospitalZone || !within_working_hours(now))) {
            granted = Privilege::ReadOnly;
        }
    }

    SymmetricKey kRi;
    rng_.fill(kRi.raw.data(), kRi.raw.size());
    kRi.role = KeyRole::ShortTermReaderImplant;

    Bytes mReader;
    {
        ByteWriter inner;
        inner.raw(BytesView(kRi.raw.data(), kRi.raw.size()));
        inner.u32(m.readerNonce.value);
        inner.u32(m.implantNonce.value);
        inner.raw(BytesView(m.implantId.raw.data(), m.implantId.raw.size()));
        inner.u8(static_cast<std::uint8_t>(granted));
        mReader = crypto::aead_encrypt(conn.kRs, BytesView(inner.bytes().data(), inner.bytes().size()),
                                       BytesView{}, rng_);
    }

    conn.bedside = BedsideRun{};
    if (mode == wire::AccessMode::Bedside) {
        conn.bedside.active = true;
        conn.bedside.implantId = m.implantId;
        conn.bedside.readerNonce = m.readerNonce;
        conn.bedside.implantNonce = m.implantNonce;
    }

    auto implantKey = registeredImplants_.find(m.implantId);
    if (implantKey == registeredImplants_.end()) {
        // Implant registered at another hospital: route the material to its
        // home server through the manufacturer.
        if (!cfg_.manufacturerId || !serverLinks_.count(*cfg_.manufacturerId))
            return reject(env, wire::RejectReason::ImplantUnknown, out);

        ByteWriter inner;
        inner.raw(BytesView(kRi.raw.data(), kRi.raw.size()));
        inner.u32(m.readerNonce.value);
        inner.u32(m.implantNonce.value);
        inner.raw(BytesView(m.readerId.raw.data(), m.readerId.raw.size()));
        inner.raw(BytesView(cardId.raw.data(), cardId.raw.size()));
        inner.u32(cardNonce.value);
        inner.u8(static_cast<std::uint8_t>(granted));
        inner.u8(static_cast<std::uint8_t>(mode));

        wire::RemoteKeyRequest req;
        req.implantId = m.implantId;
        req.payload = crypto::aead_encrypt(serverLinks_.at(*cfg_.manufacturerId),
                                           BytesView(inner.bytes().data(), inner.bytes().size()),
                                           BytesView{}, rng_);
        conn.remotePending = true;
        conn.pendingMReader = std::move(mReader);
        conn.pendingReaderId = m.readerId;
        out.send(Channel::Internet, cfg_.id, *cfg_.manufacturerId, std::move(req));
        return;
    }

    Bytes mImplant;
    {
        ByteWriter inner;
        inner.raw(BytesView(kRi.raw.data(), kRi.raw.size()));
        inner.u32(m.readerNonce.value);
        inner.u32(m.implantNonce.value);
        inner.raw(BytesView(m.readerId.raw.data(), m.readerId.raw.size()));
        inner.raw(BytesView(cardId.raw.data(), cardId.raw.size()));
        inner.u32(cardNonce.value);
        inner.u8(static_cast<std::uint8_t>(granted));
        inner.u8(static_cast<std::uint8_t>(mode));
        mImplant = crypto::aead_encrypt(implantKey->second,
                                        BytesView(inner.bytes().data(), inner.bytes().size()),
                                        BytesView{}, rng_);
    }

    if (loadLevel_ > 0) --loadLevel_;  // handshake resolved
    out.send(Channel::Internet, cfg_.id, env.src, wire::KeyResponse{std::move(mReader),
                                                                    std::move(mImplant)});
}

void HospitalServer::push_bedside_command(Conn& conn, const EntityId& readerId, Outbox& out) {
    auto& run = conn.bedside;
    if (run.nextCommand >= cfg_.bedsideCommands.size()) {
        run.finished = true;
        return;
    }
    Command cmd = cfg_.bedsideCommands[run.nextCommand];

    Nonce nr = run.readerNonce.plus(run.round);
    Nonce ni = run.implantNonce.plus(run.round);
    ByteWriter macMsg;
    macMsg.u32(cmd.word());
    macMsg.u32(nr.value);
    macMsg.u32(ni.value);
    auto serverMac = crypto::mac(registeredImplants_.at(run.implantId),
                                 BytesView(macMsg.bytes().data(), macMsg.bytes().size()));

    ByteWriter inner;
    inner.u32(cmd.word());
    inner.u32(nr.value);
    inner.u32(ni.value);
    inner.raw(BytesView(serverMac.data(), serverMac.size()));

    wire::BedsideCommand msg;
    msg.cryptogram = crypto::aead_encrypt(conn.kRs,
                                          BytesView(inner.bytes().data(), inner.bytes().size()),
                                          BytesView{}, rng_);
    out.send(Channel::Internet, cfg_.id, readerId, std::move(msg));
}

void HospitalServer::handle_bedside_ready(const wire::BedsideReady& m, const Envelope& env,
                                          Outbox& out) {
    auto it = conns_.find(env.src);
    if (it == conns_.end() || !it->second.secure || !it->second.bedside.active) return;
    auto& conn = it->second;

    auto pt = crypto::aead_decrypt(conn.kRs, BytesView(m.cryptogram.data(), m.cryptogram.size()),
                                   BytesView{});
    if (!pt || pt->size() != kEntityIdBytes + 4 + 4) return;
    ByteReader r(BytesView(pt->data(), pt->size()));
    EntityId implantId;
    implantId.raw = r.arr<kEntityIdBytes>();
    Nonce nr{r.u32()}, ni{r.u32()};
    if (implantId != conn.bedside.implantId || nr != conn.bedside.readerNonce ||
        ni != conn.bedside.implantNonce)
        return;
    push_bedside_command(conn, env.src, out);
}

void HospitalServer::handle_bedside_answer(const wire::BedsideAnswer& m, const Envelope& env,
                                           Outbox& out) {
    auto it = conns_.find(env.src);
    if (it == conns_.end() || !it->second.bedside.active) return;
    auto& conn = it->second;

    ByteWriter ad;
    ad.u32(m.chunkIndex);
    ad.u32(m.chunkCount);
    auto pt = crypto::aead_decrypt(conn.kRs, BytesView(m.cryptogram.data(), m.cryptogram.size()),
                                   BytesView(ad.bytes().data(), ad.bytes().size()));
    if (!pt) return;
    conn.bedside.pendingChunks.push_back(*pt);
    if (m.chunkIndex + 1 == m.chunkCount) {
        Bytes whole;
        for (auto& c : conn.bedside.pendingChunks) whole.insert(whole.end(), c.begin(), c.end());
        conn.bedside.pendingChunks.clear();
        retrievedLogs_[conn.bedside.implantId].push_back(std::move(whole));
        ++conn.bedside.round;
        ++conn.bedside.nextCommand;
        push_bedside_command(conn, env.src, out);
    }
}

void HospitalServer::handle_remote_forward(const wire::RemoteKeyForward& m, const Envelope& env,
                                           Outbox& out) {
    // Acting as the implant's home (local) hospital.
    auto link = serverLinks_.find(env.src);
    auto implantKey = registeredImplants_.find(m.implantId);
    if (link == serverLinks_.end()) return;
    if (implantKey == registeredImplants_.end()) {
        out.send(Channel::Internet, cfg_.id, env.src,
                 wire::RemoteFail{wire::RejectReason::ImplantUnknown});
        return;
    }
    auto pt = crypto::aead_decrypt(link->second, BytesView(m.payload.data(), m.payload.size()),
                                   BytesView{});
    if (!pt || pt->size() != kLinkPayloadLen) {
        out.send(Channel::Internet, cfg_.id, env.src,
                 wire::RemoteFail{wire::RejectReason::ServerLinkFailure});
        return;
    }

    wire::RemoteKeyReply reply;
    reply.implantId = m.implantId;
    reply.mImplant = crypto::aead_encrypt(implantKey->second, BytesView(pt->data(), pt->size()),
                                          BytesView{}, rng_);
    out.send(Channel::Internet, cfg_.id, env.src, std::move(reply));
}

void HospitalServer::handle_remote_reply(const wire::RemoteKeyReply& m, const Envelope& env,
                                         Outbox& out) {
    (void)env;
    for (auto& [readerId, conn] : conns_) {
        if (conn.remotePending) {
            conn.remotePending = false;
            if (loadLevel_ > 0) --loadLevel_;
            out.send(Channel::Internet, cfg_.id, readerId,
                     wire::KeyResponse{std::move(conn.pendingMReader), m.mImplant});
            return;
        }
    }
}

void HospitalServer::handle_remote_fail(const wire::RemoteFail& m, const Envelope& env,
                                        Outbox& out) {
    (void)env;
    for (auto& [readerId, conn] : conns_) {
        if (conn.remotePending) {
            conn.remotePending = false;
            out.send(Channel::Internet, cfg_.id, readerId, wire::Reject{m.reason});
            return;
        }
    }
}

void ManufacturerServer::register_implant_home(const EntityId& implantId,
                                               const EntityId& homeServerId) {
    registry_[implantId] = homeServerId;
}

void ManufacturerServer::add_server_link(const EntityId& peer, const SymmetricKey& key) {
    links_[peer] = key;
}

void ManufacturerServer::on_message(const Envelope& env, SimTimeMs now, Outbox& out) {
    (void)now;
    if (auto* m = std::get_if<wire::RemoteKeyRequest>(&env.msg)) {
        auto origin = links_.find(env.src);
        if (origin == links_.end()) return;
        auto home = registry_.find(m->implantId);
        if (home == registry_.end()) {
            out.send(Channel::Internet, cfg_.id, env.src,
                     wire::RemoteFail{wire::RejectReason::ImplantUnknown});
            return;
        }
        auto homeLink = links_.find(home->second);
        if (homeLink == links_.end()) {
            out.send(Channel::Internet, cfg_.id, env.src,
                     wire::RemoteFail{wire::RejectReason::ServerLinkFailure});
            return;
        }
        auto pt = crypto::aead_decrypt(origin->second, BytesView(m->payload.data(), m->payload.size()),
                                       BytesView{});
        if (!pt) {
            out.send(Channel::Internet, cfg_.id, env.src,
                     wire::RemoteFail{wire::RejectReason::ServerLinkFailure});
            return;
        }
        pendingOrigin_[m->implantId] = env.src;
        wire::RemoteKeyForward fwd;
        fwd.implantId = m->implantId;
        fwd.originServerId = env.src;
        fwd.payload = crypto::aead_encrypt(homeLink->second, BytesView(pt->data(), pt->size()),
                                           BytesView{}, rng_);
        out.send(Channel::Internet, cfg_.id, home->second, std::move(fwd));
        return;
    }
    if (auto* m = std::get_if<wire::RemoteKeyReply>(&env.msg)) {
        auto pending = pendingOrigin_.find(m->implantId);
        if (pending == pendingOrigin_.end()) return;
        EntityId origin = pending->second;
        pendingOrigin_.erase(pending);
        out.send(Channel::Internet, cfg_.id, origin, *m);
        return;
    }
    if (auto* m = std::get_if<wire::RemoteFail>(&env.msg)) {
        // Home hospital failed; relay to whichever request is pending.
        if (!pendingOrigin_.empty()) {
            EntityId origin = pendingOrigin_.begin()->second;
            pendingOrigin_.erase(pendingOrigin_.begin());
            out.send(Channel::Internet, cfg_.id, origin, *m);
        }
        return;
    }
}

}  // namespace imdsec::entities
