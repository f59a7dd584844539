#include "imdsec/netsim/world.hpp"

namespace imdsec::netsim {

World::World(const Config& cfg) : cfg_(cfg), seeder_(cfg.seed), now_(cfg.startTimeMs) {}

Implant& World::add_implant(entities::Implant::Config cfg) {
    cfg.rngSeed = seeder_.fork(0x11).next_u64();
    auto actor = std::make_unique<Implant>(cfg, cfg_.costTable);
    auto& ref = *actor;
    actors_[cfg.id] = std::move(actor);
    return ref;
}

Reader& World::add_reader(entities::Reader::Config cfg) {
    cfg.rngSeed = seeder_.fork(0x22).next_u64();
    auto actor = std::make_unique<Reader>(cfg);
    auto& ref = *actor;
    actors_[cfg.id] = std::move(actor);
    return ref;
}

SmartCard& World::add_card(entities::SmartCard::Config cfg) {
    cfg.rngSeed = seeder_.fork(0x33).next_u64();
    auto actor = std::make_unique<SmartCard>(cfg);
    auto& ref = *actor;
    actors_[cfg.id] = std::move(actor);
    return ref;
}

HospitalServer& World::add_server(entities::HospitalServer::Config cfg) {
    cfg.rngSeed = seeder_.fork(0x44).next_u64();
    auto actor = std::make_unique<HospitalServer>(cfg);
    auto& ref = *actor;
    actors_[cfg.id] = std::move(actor);
    return ref;
}

ManufacturerServer& World::add_manufacturer(entities::ManufacturerServer::Config cfg) {
    cfg.rngSeed = seeder_.fork(0x55).next_u64();
    auto actor = std::make_unique<ManufacturerServer>(cfg);
    auto& ref = *actor;
    actors_[cfg.id] = std::move(actor);
    return ref;
}

void World::connect_oob(const EntityId& a, const EntityId& b) {
    oobLinks_.insert({a, b});
    oobLinks_.insert({b, a});
}

void World::disconnect_oob(const EntityId& a, const EntityId& b) {
    oobLinks_.erase({a, b});
    oobLinks_.erase({b, a});
}

Actor* World::find(const EntityId& id) {
    auto it = actors_.find(id);
    return it == actors_.end() ? nullptr : it->second.get();
}

SimTimeMs World::latency(Channel c) const {
    switch (c) {
        case Channel::RF: return cfg_.rfLatencyMs;
        case Channel::OOB: return cfg_.oobLatencyMs;
        case Channel::Internet: return cfg_.internetLatencyMs;
        case Channel::CardSlot: return cfg_.cardSlotLatencyMs;
    }
    return 1;
}

void World::record(Channel c, const EntityId& src, const EntityId& dst, TraceAction a,
                   const wire::Message* msg) {
    TraceEvent ev;
    ev.seq = seq_++;
    ev.timeMs = now_;
    ev.channel = c;
    ev.src = src;
    ev.dst = dst;
    ev.action = a;
    if (msg) {
        ev.msgType = wire::msg_type_name(wire::msg_type(*msg));
        ev.frame = wire::encode_frame(*msg);
    }
    trace_.record(std::move(ev));
}

void World::schedule(SimTimeMs at, Event ev) {
    queue_.emplace(std::make_pair(at, seq_++), std::move(ev));
}

void World::start_session(const EntityId& readerId, const RunPlan& plan) {
    if (auto* actor = find(readerId)) {
        if (auto* reader = dynamic_cast<Reader*>(actor)) reader->set_plan(plan);
    }
    record(Channel::RF, readerId, readerId, TraceAction::Kick, nullptr);
    Event ev{Event::Kind::Kick, {}, readerId, 0};
    schedule(now_, std::move(ev));
}

void World::inject(const Envelope& env) {
    // The touch channel admits no adversary-originated events, ever.
    if (env.channel == Channel::OOB) {
        record(env.channel, env.src, env.dst, TraceAction::Blocked, &env.msg);
        return;
    }
    record(env.channel, env.src, env.dst, TraceAction::Inject, &env.msg);
    schedule_delivery(env, TraceAction::Inject);
}

void World::replay_range(std::uint64_t seqFrom, std::uint64_t seqTo) {
    for (const auto& ev : trace_.sends_in(seqFrom, seqTo)) {
        auto decoded = wire::decode_frame(BytesView(ev.frame.data(), ev.frame.size()));
        if (!decoded.ok()) continue;
        Envelope env{ev.channel, ev.src, ev.dst, std::move(*decoded.message)};
        record(env.channel, env.src, env.dst, TraceAction::Replay, &env.msg);
        schedule_delivery(env, TraceAction::Replay);
    }
}

void World::schedule_delivery(const Envelope& env, TraceAction) {
    Event ev{Event::Kind::Delivery, env, env.dst, 0};
    schedule(now_ + latency(env.channel), std::move(ev));
}

void World::route_send(const Envelope& env) {
    record(env.channel, env.src, env.dst, TraceAction::Send, &env.msg);

    switch (env.channel) {
        case Channel::CardSlot:
            schedule_delivery(env, TraceAction::Send);
            return;
        case Channel::OOB:
            // Touch-to-access: no contact, no channel. The adversary can
            // neither observe nor inject here.
            if (!oobLinks_.count({env.src, env.dst})) {
                record(env.channel, env.src, env.dst, TraceAction::Blocked, &env.msg);
                return;
            }
            schedule_delivery(env, TraceAction::Send);
            return;
        case Channel::RF:
        case Channel::Internet:
            break;
    }

    // Every RF/Internet frame passes through the adversary exactly once.
    auto decision = adversary_.process(env);
    if (decision.modifiedFrame) {
        auto decoded =
            wire::decode_frame(BytesView(decision.modifiedFrame->data(),
                                         decision.modifiedFrame->size()));
        record(env.channel, env.src, env.dst, TraceAction::Modify, &env.msg);
        if (decoded.ok()) {
            Envelope mutated{env.channel, env.src, env.dst, std::move(*decoded.message)};
            schedule_delivery(mutated, TraceAction::Modify);
        }
        // Undecodable mutations die at the destination's frame parser.
    } else if (decision.deliverOriginal) {
        schedule_delivery(env, TraceAction::Send);
    } else {
        record(env.channel, env.src, env.dst, TraceAction::Drop, &env.msg);
    }
    for (const auto& extra : decision.extra) {
        record(extra.channel, extra.src, extra.dst, TraceAction::Replay, &extra.msg);
        schedule_delivery(extra, TraceAction::Replay);
    }
}

void World::dispatch_outbox(Outbox& out, const EntityId& sender) {
    for (auto& timer : out.timers()) {
        Event ev{Event::Kind::Timer, {}, sender, timer.tag};
        schedule(timer.at, std::move(ev));
    }
    for (auto& env : out.frames()) route_send(env);
}

bool World::run_until_quiescent() {
    std::uint64_t processed = 0;
    while (!queue_.empty()) {
        if (++processed > cfg_.eventBudget) {
            budgetExceeded_ = true;
            return false;
        }
        auto it = queue_.begin();
        now_ = std::max(now_, it->first.first);
        Event ev = std::move(it->second);
        queue_.erase(it);

        Outbox out;
        switch (ev.kind) {
            case Event::Kind::Delivery: {
                if (auto* actor = find(ev.env.dst)) {
                    record(ev.env.channel, ev.env.src, ev.env.dst, TraceAction::Deliver,
                           &ev.env.msg);
                    actor->on_message(ev.env, now_, out);
                    dispatch_outbox(out, ev.env.dst);
                }
                break;
            }
            case Event::Kind::Timer: {
                if (auto* actor = find(ev.entity)) {
                    actor->on_timer(ev.timerTag, now_, out);
                    dispatch_outbox(out, ev.entity);
                }
                break;
            }
            case Event::Kind::Kick: {
                if (auto* actor = find(ev.entity)) {
                    actor->on_kick(now_, out);
                    dispatch_outbox(out, ev.entity);
                }
                break;
            }
        }
    }
    return true;
}

void World::advance_time(SimTimeMs deltaMs) { now_ += deltaMs; }

}  // namespace imdsec::netsim
