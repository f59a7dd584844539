#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "imdsec/rng.hpp"
#include "imdsec/types.hpp"
#include "imdsec/wire.hpp"

namespace imdsec::entities {

using SimTimeMs = std::uint64_t;

enum class Channel : std::uint8_t {
    RF = 0,        // reader <-> implant; fully adversary-controlled
    OOB = 1,       // touch channel; adversary may neither read nor write
    Internet = 2,  // reader <-> server, server <-> server; adversary-visible
    CardSlot = 3,  // reader <-> inserted card; tampered only via a hacked reader
};

const char* channel_name(Channel c);

struct Envelope {
    Channel channel = Channel::RF;
    EntityId src{};
    EntityId dst{};
    wire::Message msg;
};

/// Handed to entities while they process an event; collects outgoing
/// frames and timer requests for the scheduler.
class Outbox {
public:
    void send(Channel channel, const EntityId& src, const EntityId& dst, wire::Message msg) {
        frames_.push_back(Envelope{channel, src, dst, std::move(msg)});
    }
    void arm_timer(SimTimeMs at, std::uint64_t tag) { timers_.push_back({at, tag}); }

    struct TimerReq {
        SimTimeMs at;
        std::uint64_t tag;
    };

    std::vector<Envelope>& frames() { return frames_; }
    std::vector<TimerReq>& timers() { return timers_; }

private:
    std::vector<Envelope> frames_;
    std::vector<TimerReq> timers_;
};

/// Event-driven protocol actor. Single-threaded; the scheduler owns delivery.
class Actor {
public:
    virtual ~Actor() = default;
    virtual EntityId id() const = 0;
    virtual void on_message(const Envelope& env, SimTimeMs now, Outbox& out) = 0;
    virtual void on_timer(std::uint64_t tag, SimTimeMs now, Outbox& out) { (void)tag, (void)now, (void)out; }
    /// Session start kick (readers only).
    virtual void on_kick(SimTimeMs now, Outbox& out) { (void)now, (void)out; }
};

/// Certificate authority key material shared across a simulation.
struct CertificateAuthority {
    KeyPair keys;

    Certificate issue(const EntityId& subject, EntityClass cls, Privilege priv,
                      const PublicKey& pub) const;
    bool check(const Certificate& cert) const;
};

/// Terminal state of one protocol run at the driving reader.
struct RunOutcome {
    enum class Status : std::uint8_t { Pending, Success, Failed };
    Status status = Status::Pending;
    std::string failureReason;
    std::vector<Bytes> answers;  // decrypted ANS payloads, one per command

    bool succeeded() const { return status == Status::Success; }
    bool failed() const { return status == Status::Failed; }
};

}  // namespace imdsec::entities
