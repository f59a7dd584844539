#pragma once

#include <optional>

#include "imdsec/crypto/suite.hpp"
#include "imdsec/energy/cost.hpp"
#include "imdsec/energy/ledger.hpp"
#include "imdsec/entities/common.hpp"
#include "imdsec/records.hpp"

namespace imdsec::entities {

/// The IMD. Pre-authentication work (session-key establishment steps 1-4,
/// OOB pairing, failure notices) runs on harvested RF energy when the
/// zero-power defense is enabled; the battery is touched only after the
/// peer is authenticated. Whether offline access demands card signatures
/// (non-repudiation) is fixed at deployment and immutable at runtime.
class Implant : public Actor {
public:
    struct Config {
        EntityId id{};
        SymmetricKey presharedKeyS{};  // K_SI
        bool nrOfflineRequired = true;  // pre-deployment; no runtime setter exists
        bool oobArmed = true;
        bool zpdEnabled = true;
        double batteryCapacityJ = 60000;
        std::size_t flashCapacityBytes = 32768;
        crypto::ImplClass implClass = crypto::ImplClass::HardwareAccelerated;
        std::uint64_t sessionTimeoutMs = 60000;
        std::size_t readStatusAnsBytes = kAnswerBytes;  // bedside bulk raises this
        std::size_t answerChunkBytes = 256;
        std::uint64_t rngSeed = 2;
    };

    Implant(const Config& cfg, const energy::CostTable& table);

    EntityId id() const override { return cfg_.id; }
    void on_message(const Envelope& env, SimTimeMs now, Outbox& out) override;

    bool nr_offline_required() const { return cfg_.nrOfflineRequired; }
    bool session_established() const { return session_ && session_->established; }
    const energy::EnergyLedger& ledger() const { return ledger_; }
    const SignatureFlash& flash() const { return flash_; }
    SignatureFlash& flash_mut() { return flash_; }

    std::uint32_t therapy_setting() const { return therapySetting_; }
    bool suspended() const { return suspended_; }
    std::uint32_t firmware_version() const { return firmwareVersion_; }
    std::uint64_t executed_commands() const { return executedCommands_; }

    struct SessionView {
        Nonce readerNonce{};
        Nonce implantNonce{};
        Privilege granted = Privilege::ReadOnly;
        wire::AccessMode mode = wire::AccessMode::OnlineCard;
        std::uint32_t round = 0;
    };
    std::optional<SessionView> session_view() const;

    /// Snapshot of the most recently established session (survives Finish).
    std::optional<SessionView> last_established_view() const { return lastEstablished_; }
    const SymmetricKey& last_session_key() const { return lastSessionKey_; }

    /// (command, granted privilege) for every executed command.
    const std::vector<std::pair<Command, Privilege>>& executed_log() const {
        return executedLog_;
    }

private:
    struct Session {
        SymmetricKey key{};      // K'_RI
        EntityId readerId{};
        Nonce readerNonce{};     // N_R (phase III)
        Nonce implantNonce{};    // N_I
        EntityId cardId{};
        Nonce cardNonce{};
        Privilege granted = Privilege::ReadOnly;
        wire::AccessMode mode = wire::AccessMode::OnlineCard;
        bool established = false;
        std::uint32_t round = 0;
        SimTimeMs lastActivity = 0;
    };

    void handle_session_init(const wire::SessionInit& m, const Envelope& env, SimTimeMs now,
                             Outbox& out);
    void handle_key_confirm(const wire::KeyConfirm& m, const Envelope& env, SimTimeMs now,
                            Outbox& out);
    void handle_command(const wire::CommandToImplant& m, const Envelope& env, SimTimeMs now,
                        Outbox& out);
    void handle_oob_request(const wire::OobAccessRequest& m, const Envelope& env, SimTimeMs now,
                            Outbox& out);
    void handle_offline_confirm(const wire::OfflineConfirm& m, const Envelope& env, SimTimeMs now,
                                Outbox& out);

    void send_auth_fail(const Envelope& env, Nonce readerNonce, Outbox& out);
    void reject(const Envelope& env, wire::RejectReason r, Outbox& out);
    void expire_if_stale(SimTimeMs now);

    Bytes answer_payload(const Command& cmd);
    void execute(const Command& cmd);

    /// Energy charge helpers; bits come from real encoded frames.
    bool charge_rx(energy::StepKind step, const wire::Message& m, bool preAuth, double blocks,
                   double rng, bool sessionStart, Channel ch);
    bool charge_tx(energy::StepKind step, const wire::Message& m, bool preAuth, double blocks,
                   Channel ch);

    Config cfg_;
    const energy::CostTable& table_;
    Rng rng_;
    energy::EnergyLedger ledger_;
    SignatureFlash flash_;
    std::optional<Session> session_;

    std::uint32_t therapySetting_ = 100;
    bool suspended_ = false;
    std::uint32_t firmwareVersion_ = 1;
    std::uint64_t executedCommands_ = 0;
    std::uint64_t statusCounter_ = 0;
    std::optional<SessionView> lastEstablished_;
    SymmetricKey lastSessionKey_{};
    std::vector<std::pair<Command, Privilege>> executedLog_;
};

}  // namespace imdsec::entities
