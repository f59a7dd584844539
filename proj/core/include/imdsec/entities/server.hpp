#pragma once

#include <map>
#include <optional>
#include <set>
#include <vector>

#include "imdsec/crypto/suite.hpp"
#include "imdsec/entities/common.hpp"
#include "imdsec/puzzle.hpp"

namespace imdsec::entities {

/// Hospital server: the trusted third party. Verifies certificates against
/// its CRL, gates connections with client puzzles under load, mints the
/// short-term keys, and enforces the network-zone / working-hours policy
/// that closes the non-repudiation gap.
class HospitalServer : public Actor {
public:
    struct Config {
        EntityId id{};
        KeyPair keyPair{};
        Certificate certificate{};
        PublicKey caPublic{};
        SymmetricKey longTermSecret{};  // K_S, feeds the puzzles
        std::uint8_t puzzleDifficulty = 12;
        std::uint32_t ddosThreshold = 100;  // concurrent handshakes before CPP kicks in
        bool forceCpp = false;
        std::uint64_t puzzleExpiryMs = 10000;
        std::uint32_t tokenLifetimeMs = 3600000;  // T_L handed to readers
        int workStartHour = 8;
        int workEndHour = 18;
        std::optional<EntityId> manufacturerId;
        std::vector<Command> bedsideCommands = {Command{CommandKind::ReadStatus, 0},
                                                Command{CommandKind::Finish, 0}};
        std::uint64_t rngSeed = 3;
    };

    explicit HospitalServer(const Config& cfg);

    EntityId id() const override { return cfg_.id; }
    void on_message(const Envelope& env, SimTimeMs now, Outbox& out) override;

    void register_implant(const EntityId& id, const SymmetricKey& kSi);
    void register_card(const EntityId& id, const SymmetricKey& kSc);
    void revoke(const EntityId& subject) { crl_.insert(subject); }
    bool revoked(const EntityId& subject) const { return crl_.count(subject) > 0; }
    void add_server_link(const EntityId& peer, const SymmetricKey& key);
    void set_reader_zone(const EntityId& readerId, bool inHospital);
    void set_token_lifetime(std::uint32_t ms) { cfg_.tokenLifetimeMs = ms; }
    void force_cpp(bool on) { cfg_.forceCpp = on; }
    void set_bedside_commands(std::vector<Command> cmds) { cfg_.bedsideCommands = std::move(cmds); }

    std::uint32_t load_level() const { return loadLevel_; }
    bool cpp_active() const { return cfg_.forceCpp || loadLevel_ > cfg_.ddosThreshold; }
    std::uint64_t puzzles_issued() const { return puzzlesIssued_; }

    /// Bedside log store, keyed by implant id.
    const std::vector<Bytes>& retrieved_logs(const EntityId& implantId) const;
    bool bedside_finished(const EntityId& readerId) const;

    const Config& config() const { return cfg_; }

private:
    struct CardContext {
        bool valid = false;
        EntityId cardId{};
        Nonce cardNonce{};
        Privilege privilege = Privilege::ReadOnly;
        SymmetricKey kRc{};
    };

    struct BedsideRun {
        bool active = false;
        EntityId implantId{};
        Nonce readerNonce{};
        Nonce implantNonce{};
        std::uint32_t round = 0;
        std::size_t nextCommand = 0;
        std::vector<Bytes> pendingChunks;
        bool finished = false;
    };

    struct Conn {
        Nonce readerNonce{};   // N_R from the hello
        Nonce serverNonce{};   // N_S, the server's authentication basis
        bool puzzlePassed = false;
        bool helloSeen = false;
        SymmetricKey kRs{};
        bool secure = false;
        bool inHospitalZone = true;
        CardContext card;
        BedsideRun bedside;
        // Pending remote establishment (implant registered elsewhere).
        bool remotePending = false;
        Bytes pendingMReader;
        EntityId pendingReaderId{};
    };

    void handle_hello(const wire::ReaderHello& m, const Envelope& env, SimTimeMs now, Outbox& out);
    void handle_puzzle_response(const wire::PuzzleResponse& m, const Envelope& env, SimTimeMs now,
                                Outbox& out);
    void handle_dh_init(const wire::DhInit& m, const Envelope& env, Outbox& out);
    void handle_token_request(const wire::TokenRequest& m, const Envelope& env, Outbox& out);
    void handle_key_request(const wire::KeyRequest& m, const Envelope& env, SimTimeMs now,
                            Outbox& out);
    void handle_bedside_ready(const wire::BedsideReady& m, const Envelope& env, Outbox& out);
    void handle_bedside_answer(const wire::BedsideAnswer& m, const Envelope& env, Outbox& out);
    void handle_remote_forward(const wire::RemoteKeyForward& m, const Envelope& env, Outbox& out);
    void handle_remote_reply(const wire::RemoteKeyReply& m, const Envelope& env, Outbox& out);
    void handle_remote_fail(const wire::RemoteFail& m, const Envelope& env, Outbox& out);

    void reject(const Envelope& env, wire::RejectReason r, Outbox& out);
    void send_server_hello(const EntityId& dst, Conn& conn, Outbox& out);
    void push_bedside_command(Conn& conn, const EntityId& readerId, Outbox& out);
    bool within_working_hours(SimTimeMs now) const;

    Config cfg_;
    Rng rng_;
    std::map<EntityId, SymmetricKey> registeredImplants_;
    std::map<EntityId, SymmetricKey> registeredCards_;
    std::set<EntityId> crl_;
    std::map<EntityId, SymmetricKey> serverLinks_;
    std::map<EntityId, Conn> conns_;
    std::set<std::string> usedMSc2_;  // single-use cryptogram guard
    std::map<EntityId, std::vector<Bytes>> retrievedLogs_;
    std::uint32_t loadLevel_ = 0;
    std::uint64_t puzzlesIssued_ = 0;
};

/// Manufacturer server: maps every deployed implant to its home hospital
/// and relays remote key-establishment material between hospitals.
class ManufacturerServer : public Actor {
public:
    struct Config {
        EntityId id{};
        std::uint64_t rngSeed = 4;
    };

    explicit ManufacturerServer(const Config& cfg) : cfg_(cfg), rng_(cfg.rngSeed) {}

    EntityId id() const override { return cfg_.id; }
    void on_message(const Envelope& env, SimTimeMs now, Outbox& out) override;

    void register_implant_home(const EntityId& implantId, const EntityId& homeServerId);
    void add_server_link(const EntityId& peer, const SymmetricKey& key);

private:
    Config cfg_;
    Rng rng_;
    std::map<EntityId, EntityId> registry_;
    std::map<EntityId, SymmetricKey> links_;
    std::map<EntityId, EntityId> pendingOrigin_;  // implantId -> requesting server
};

}  // namespace imdsec::entities
