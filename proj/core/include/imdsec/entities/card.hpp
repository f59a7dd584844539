#pragma once

#include <optional>

#include "imdsec/crypto/suite.hpp"
#include "imdsec/entities/common.hpp"

namespace imdsec::entities {

/// Personal smart card. Powered only while inserted in a reader, so
/// everything that must survive between phases lives in `flash`; RAM state
/// is dropped by power_cycle(). PIN retry limit is 3, then a permanent lock.
class SmartCard : public Actor {
public:
    struct Config {
        EntityId id{};
        SymmetricKey presharedKeyS{};  // K_SC
        KeyPair keyPair{};
        Certificate certificate{};
        std::uint32_t pin = 0;
        int pinRetryLimit = 3;
        std::uint64_t rngSeed = 1;
    };

    explicit SmartCard(const Config& cfg);

    EntityId id() const override { return cfg_.id; }
    void on_message(const Envelope& env, SimTimeMs now, Outbox& out) override;

    /// Card removed from the reader: RAM clears, flash persists.
    void power_cycle();

    bool locked() const { return locked_; }
    int pin_retry_count() const { return pinRetryCount_; }
    bool has_token() const { return flash_.valid; }
    const Certificate& certificate() const { return cfg_.certificate; }

    /// Non-volatile contents; exposed for the persistence property test.
    struct FlashState {
        bool valid = false;
        Nonce readerNonce{};
        Nonce cardNonce{};
        Nonce serverNonce{};  // carried into m_SC2
        SymmetricKey sessionKey{};  // K'_RC
    };
    const FlashState& flash() const { return flash_; }

private:
    void handle_auth_init(const wire::CardAuthInit& m, const Envelope& env, Outbox& out);
    void handle_confirm(const wire::CardConfirm& m, const Envelope& env, Outbox& out);
    void handle_pin(const wire::PinVerify& m, const Envelope& env, Outbox& out);
    void handle_command(const wire::CommandToCard& m, const Envelope& env, Outbox& out);
    void reject(const Envelope& env, wire::RejectReason r, Outbox& out);

    using Digest = crypto::Digest256;
    static Digest pin_digest(const EntityId& id, std::uint32_t pin);

    Config cfg_;
    Rng rng_;
    Digest pinHash_{};
    int pinRetryCount_ = 0;
    bool locked_ = false;

    FlashState flash_;

    // RAM: pending five-pass context and the main-phase round counter.
    struct Pending {
        bool active = false;
        EntityId readerId{};
        Nonce readerNonce{};
        Nonce cardNonce{};
        Nonce serverNonce{};
    };
    Pending pending_;
    std::uint32_t commandRound_ = 0;
};

}  // namespace imdsec::entities
