#pragma once

#include <optional>
#include <vector>

#include "imdsec/crypto/suite.hpp"
#include "imdsec/entities/common.hpp"

namespace imdsec::entities {

enum class ReaderKind : std::uint8_t { Valid, Stolen, Hacked, Forged };

const char* reader_kind_name(ReaderKind k);

/// What a run should do and how far it should go.
struct RunPlan {
    enum class Mode : std::uint8_t { Online, Offline, Bedside };
    enum class StopAfter : std::uint8_t { CardAuth, UserAuth, Full };

    Mode mode = Mode::Online;
    StopAfter stopAfter = StopAfter::Full;
    std::vector<std::uint32_t> pins = {1234};  // tried in order on mismatch
    std::vector<Command> commands;
    bool sendFinish = true;
    bool noCard = false;           // offline access without a card
    bool unsignedCommands = false; // no-NR deployments: no signature material at all
    bool resumeWithTokens = false; // reuse held tokens: start at user authentication
};

/// Message-rewrite hooks a hacked reader exposes to its operator. The
/// reader's stored keys stay opaque; only the card-slot data flow is bent.
struct HackedHooks {
    std::optional<Command> signDecoyInstead;  // card signs this, not the real command
    std::optional<Command> sendInstead;       // implant receives this, signature unchanged
};

/// External programmer/reader; drives all protocol phases. One instance
/// keeps its reader-card tokens across runs so an offline session can use
/// tokens obtained while the reader was last online.
class Reader : public Actor {
public:
    struct Config {
        EntityId id{};
        KeyPair keyPair{};
        Certificate certificate{};
        PublicKey caPublic{};  // root of trust for the server certificate
        EntityId serverId{};
        EntityId implantId{};
        EntityId cardId{};  // card currently in the slot; zero when absent
        ReaderKind kind = ReaderKind::Valid;
        HackedHooks hooks;
        std::uint64_t phaseTimeoutMs = 5000;
        std::uint64_t rngSeed = 5;
    };

    explicit Reader(const Config& cfg);

    EntityId id() const override { return cfg_.id; }
    void on_message(const Envelope& env, SimTimeMs now, Outbox& out) override;
    void on_timer(std::uint64_t tag, SimTimeMs now, Outbox& out) override;
    void on_kick(SimTimeMs now, Outbox& out) override;

    void set_plan(const RunPlan& plan) { plan_ = plan; }
    void insert_card(const EntityId& cardId) { cfg_.cardId = cardId; }
    void remove_card() { cfg_.cardId = EntityId{}; }
    void set_hooks(const HackedHooks& hooks) { cfg_.hooks = hooks; }

    const RunOutcome& outcome() const { return outcome_; }
    ReaderKind kind() const { return cfg_.kind; }

    /// Milliseconds left on the reader-card token at `now`; nullopt when no
    /// token is held.
    std::optional<std::int64_t> token_remaining_ms(SimTimeMs now) const;
    bool has_token() const { return tokens_.valid; }
    Privilege card_privilege() const { return tokens_.privilege; }
    Privilege granted_privilege() const { return granted_; }

    /// Drops all held token/session material (pairing reset after duty).
    void reset_pairing();

    // Introspection for property tests and the audit tooling.
    const SymmetricKey& token_key() const { return tokens_.kRc; }
    const SymmetricKey& session_key() const { return kRi_; }
    bool session_key_valid() const { return kRiValid_; }
    Nonce session_reader_nonce() const { return sessionNonce_; }
    Nonce session_implant_nonce() const { return implantNonce_; }
    const SymmetricKey& server_key() const { return kRs_; }

private:
    enum class Phase : std::uint8_t {
        Idle,
        AwaitServerHello,
        AwaitDhResponse,
        AwaitCardReply,
        AwaitTokens,
        AwaitCardConfirm,
        AwaitPinReply,
        AwaitImplantHello,
        AwaitKeyResponse,
        AwaitKeyConfirm,
        AwaitOobKey,
        AwaitOfflineConfirmReply,
        AwaitSignature,
        AwaitAnswer,
        AwaitBedsideCommand,
        Done,
    };

    struct Tokens {
        bool valid = false;
        SymmetricKey kRc{};
        Nonce readerNonce{};  // N_R of the five-pass run
        Nonce cardNonce{};    // N_C
        EntityId cardId{};
        Privilege privilege = Privilege::ReadOnly;
        std::uint32_t lifetimeMs = 0;  // T_L
        SimTimeMs issuedAt = 0;
    };

    void fail(SimTimeMs now, const std::string& reason);
    void succeed();
    void enter(Phase p, SimTimeMs now, Outbox& out);
    bool token_clock_ok(SimTimeMs now) const;

    void begin_online(SimTimeMs now, Outbox& out);
    void begin_offline(SimTimeMs now, Outbox& out);
    void send_pin(SimTimeMs now, Outbox& out);
    void begin_session_key(SimTimeMs now, Outbox& out);
    void main_phase_next(SimTimeMs now, Outbox& out);
    void send_command_to_implant(const Command& cmd, const Signature& sig, SimTimeMs now,
                                 Outbox& out);

    void handle_puzzle(const wire::PuzzleChallenge& m, SimTimeMs now, Outbox& out);
    void handle_server_hello(const wire::ServerHello& m, SimTimeMs now, Outbox& out);
    void handle_dh_response(const wire::DhResponse& m, SimTimeMs now, Outbox& out);
    void handle_card_reply(const wire::CardAuthReply& m, SimTimeMs now, Outbox& out);
    void handle_tokens(const wire::TokenResponse& m, SimTimeMs now, Outbox& out);
    void handle_card_confirm(const wire::CardConfirmReply& m, SimTimeMs now, Outbox& out);
    void handle_pin_reply(const wire::PinReply& m, SimTimeMs now, Outbox& out);
    void handle_session_hello(const wire::SessionHello& m, SimTimeMs now, Outbox& out);
    void handle_key_response(const wire::KeyResponse& m, SimTimeMs now, Outbox& out);
    void handle_key_confirm_reply(const wire::KeyConfirmReply& m, SimTimeMs now, Outbox& out);
    void handle_oob_key(const wire::OobKeyTransfer& m, SimTimeMs now, Outbox& out);
    void handle_offline_confirm_reply(const wire::OfflineConfirmReply& m, SimTimeMs now,
                                      Outbox& out);
    void handle_signature(const wire::CommandSignature& m, SimTimeMs now, Outbox& out);
    void handle_answer(const wire::CommandAnswer& m, SimTimeMs now, Outbox& out);
    void handle_bedside_command(const wire::BedsideCommand& m, SimTimeMs now, Outbox& out);

    Config cfg_;
    Rng rng_;
    RunPlan plan_;
    RunOutcome outcome_;

    Phase phase_ = Phase::Idle;
    std::uint64_t phaseGen_ = 0;

    // Phase 0 context.
    Nonce helloNonce_{};
    Nonce serverNonce_{};
    std::optional<crypto::DhEphemeral> dhEph_;
    SymmetricKey kRs_{};
    bool kRsValid_ = false;

    Tokens tokens_;
    Bytes mSc2_;
    std::size_t pinIdx_ = 0;

    // Phase III / main-phase context.
    Nonce sessionNonce_{};  // N_R of session-key establishment
    Nonce implantNonce_{};
    EntityId sessionImplantId_{};
    SymmetricKey kRi_{};
    bool kRiValid_ = false;
    Privilege granted_ = Privilege::ReadOnly;
    wire::AccessMode sessionMode_ = wire::AccessMode::OnlineCard;
    std::uint32_t round_ = 0;
    std::size_t commandIdx_ = 0;
    bool finishQueued_ = false;
    Command currentCommand_{};
    std::vector<Bytes> chunks_;
    // Bedside relay context.
    Command bedsideCommand_{};
    wire::MacTag bedsideServerMac_{};
};

}  // namespace imdsec::entities
