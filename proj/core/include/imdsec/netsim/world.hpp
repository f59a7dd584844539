#pragma once

#include <map>
#include <memory>
#include <set>

#include "imdsec/energy/cost.hpp"
#include "imdsec/entities/card.hpp"
#include "imdsec/entities/implant.hpp"
#include "imdsec/entities/reader.hpp"
#include "imdsec/entities/server.hpp"
#include "imdsec/netsim/adversary.hpp"
#include "imdsec/netsim/trace.hpp"

namespace imdsec::netsim {

using entities::Actor;
using entities::HospitalServer;
using entities::Implant;
using entities::ManufacturerServer;
using entities::Outbox;
using entities::Reader;
using entities::RunPlan;
using entities::SmartCard;

/// Deterministic discrete-event simulation: entities, channels, the
/// rule-based adversary, and the trace. (seed, scenario) -> trace is a
/// pure function; two runs with the same inputs are byte-identical.
class World {
public:
    struct Config {
        std::uint64_t seed = 1;
        SimTimeMs startTimeMs = 9ull * 3600 * 1000;  // 09:00, inside working hours
        SimTimeMs rfLatencyMs = 2;
        SimTimeMs oobLatencyMs = 5;
        SimTimeMs internetLatencyMs = 10;
        SimTimeMs cardSlotLatencyMs = 1;
        std::uint64_t eventBudget = 200000;
        energy::CostTable costTable = energy::CostTable::calibrated();
    };

    explicit World(const Config& cfg);

    Implant& add_implant(entities::Implant::Config cfg);
    Reader& add_reader(entities::Reader::Config cfg);
    SmartCard& add_card(entities::SmartCard::Config cfg);
    HospitalServer& add_server(entities::HospitalServer::Config cfg);
    ManufacturerServer& add_manufacturer(entities::ManufacturerServer::Config cfg);

    /// Touch contact: required before any OOB frame can flow between the two.
    void connect_oob(const EntityId& a, const EntityId& b);
    void disconnect_oob(const EntityId& a, const EntityId& b);

    void start_session(const EntityId& readerId, const RunPlan& plan);

    /// Injects an adversary-originated frame (Dolev-Yao insert).
    void inject(const Envelope& env);

    /// Re-injects recorded frames verbatim (Dolev-Yao replay).
    void replay_range(std::uint64_t seqFrom, std::uint64_t seqTo);

    /// Drains the event queue; returns false if the event budget tripped.
    bool run_until_quiescent();

    /// Advances virtual time while the queue is idle (e.g. to expire T_L).
    void advance_time(SimTimeMs deltaMs);

    SimTimeMs now() const { return now_; }
    Adversary& adversary() { return adversary_; }
    const Trace& trace() const { return trace_; }
    const energy::CostTable& cost_table() const { return cfg_.costTable; }
    std::uint64_t fork_seed(std::uint64_t label) { return seeder_.fork(label).next_u64(); }
    bool budget_exceeded() const { return budgetExceeded_; }

private:
    struct Event {
        enum class Kind : std::uint8_t { Delivery, Timer, Kick } kind;
        Envelope env;
        EntityId entity{};
        std::uint64_t timerTag = 0;
    };

    void schedule(SimTimeMs at, Event ev);
    void dispatch_outbox(Outbox& out, const EntityId& sender);
    void route_send(const Envelope& env);
    void schedule_delivery(const Envelope& env, TraceAction action);
    SimTimeMs latency(Channel c) const;
    void record(Channel c, const EntityId& src, const EntityId& dst, TraceAction a,
                const wire::Message* msg);
    Actor* find(const EntityId& id);

    Config cfg_;
    Rng seeder_;
    SimTimeMs now_ = 0;
    std::uint64_t seq_ = 0;
    std::multimap<std::pair<SimTimeMs, std::uint64_t>, Event> queue_;
    std::map<EntityId, std::unique_ptr<Actor>> actors_;
    std::set<std::pair<EntityId, EntityId>> oobLinks_;
    Adversary adversary_;
    Trace trace_;
    bool budgetExceeded_ = false;
};

}  // namespace imdsec::netsim
