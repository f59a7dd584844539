#pragma once

#include <sstream>
#include <vector>

#include "imdsec/netsim/scenario.hpp"

// Randomized adversary-rule harness behind the security property suite:
// drives honest sessions through worlds where the Dolev-Yao adversary
// drops, corrupts, duplicates, replays or substitutes frames at random,
// then checks the protocol-wide properties the formal analysis promises.

namespace imdsec::harness {

using namespace imdsec::netsim;

enum class Phase : int { ReaderCardAuth = 1, UserAuth = 2, SessionKey = 3, MainPhase = 4 };

inline std::vector<wire::MsgType> phase_targets(Phase p) {
    switch (p) {
        case Phase::ReaderCardAuth:
            return {wire::MsgType::ReaderHello, wire::MsgType::ServerHello, wire::MsgType::DhInit,
                    wire::MsgType::DhResponse, wire::MsgType::TokenRequest,
                    wire::MsgType::TokenResponse};
        case Phase::UserAuth:
            // PIN material transits the card slot; its wire artifact is the
            // m_SC2 cryptogram inside the key request.
            return {wire::MsgType::KeyRequest, wire::MsgType::TokenResponse};
        case Phase::SessionKey:
            return {wire::MsgType::SessionInit, wire::MsgType::SessionHello,
                    wire::MsgType::KeyRequest, wire::MsgType::KeyResponse,
                    wire::MsgType::KeyConfirm, wire::MsgType::KeyConfirmReply};
        case Phase::MainPhase:
            return {wire::MsgType::CommandToImplant, wire::MsgType::CommandAnswer};
    }
    return {};
}

struct Violations {
    int secrecy = 0;
    int nonceAgreement = 0;
    int replayAccepted = 0;
    int privilege = 0;
    int recordVerification = 0;
    int runs = 0;

    int total() const {
        return secrecy + nonceAgreement + replayAccepted + privilege + recordVerification;
    }
    std::string summary() const {
        std::ostringstream os;
        os << "runs=" << runs << " secrecy=" << secrecy << " nonces=" << nonceAgreement
           << " replay=" << replayAccepted << " privilege=" << privilege
           << " records=" << recordVerification;
        return os.str();
    }
};

inline Violations run_security_batch(Phase phase, int count, std::uint64_t baseSeed) {
    Violations v;
    for (int i = 0; i < count; ++i) {
        std::uint64_t seed = baseSeed + std::uint64_t(i) * 7919;
        Rng rng(seed ^ 0xFEED);

        TestbedConfig cfg;
        cfg.seed = seed;
        cfg.role = rng.below(2) ? UserRole::Physician : UserRole::Nurse;
        auto tb = make_testbed(cfg);

        // One to three random tampering rules aimed at this phase's traffic.
        auto targets = phase_targets(phase);
        int ruleCount = 1 + static_cast<int>(rng.below(3));
        for (int r = 0; r < ruleCount; ++r) {
            AdversaryRule rule;
            rule.msgType = targets[rng.below(targets.size())];
            rule.matchIndex = static_cast<std::uint32_t>(rng.below(3));
            rule.action = static_cast<AdversaryRule::Action>(rng.below(5));
            rule.param = rng.next_u32();
            tb.world->adversary().add_rule(rule);
        }

        entities::RunPlan plan;
        plan.commands.push_back(Command{CommandKind::ReadStatus, 0});
        if (cfg.role == UserRole::Physician && rng.below(2))
            plan.commands.push_back(Command{CommandKind::WriteTherapy, rng.next_u32() & 0xffffff});
        tb.world->start_session(tb.readerId, plan);
        tb.world->run_until_quiescent();
        ++v.runs;

        const auto& knowledge = tb.world->adversary().knowledge();
        const auto& outcome = tb.reader->outcome();

        // (a) Secrecy: short-term keys, PIN, commands and answers stay out
        // of the adversary's derivable set.
        bool leak = false;
        if (tb.reader->has_token() && knowledge.contains_key(tb.reader->token_key())) leak = true;
        if (tb.reader->session_key_valid() && knowledge.contains_key(tb.reader->session_key()))
            leak = true;
        if (!tb.implant->last_session_key().is_zero() &&
            knowledge.contains_key(tb.implant->last_session_key()))
            leak = true;
        {
            ByteWriter pinBytes;
            pinBytes.u32(tb.pin);
            if (knowledge.contains(BytesView(pinBytes.bytes().data(), 4))) leak = true;
        }
        for (const auto& cmd : plan.commands) {
            ByteWriter w;
            w.u32(cmd.word());
            if (knowledge.contains(BytesView(w.bytes().data(), 4))) leak = true;
        }
        for (const auto& ans : outcome.answers) {
            if (!ans.empty() && knowledge.contains(BytesView(ans.data(), ans.size()))) leak = true;
        }
        if (leak) ++v.secrecy;

        // (b) A session completed at the reader implies the implant ran the
        // matching exchange with the same nonces.
        if (outcome.succeeded()) {
            auto view = tb.implant->last_established_view();
            if (!view || view->readerNonce != tb.reader->session_reader_nonce() ||
                view->implantNonce != tb.reader->session_implant_nonce())
                ++v.nonceAgreement;
        }

        // (d) No executed command above the granted privilege.
        for (const auto& [cmd, granted] : tb.implant->executed_log()) {
            if (!(required_privilege(cmd.kind) <= granted)) ++v.privilege;
        }

        // (e) Every stored write record verifies under the card key.
        auto audit = tb.audit();
        if (audit.failed_count() != 0) ++v.recordVerification;

        // (c) A stale full-trace replay must not execute or establish.
        auto executedBefore = tb.implant->executed_commands();
        auto writesBefore = tb.implant->flash().total_writes();
        auto lastSeq = tb.world->trace().events().back().seq;
        tb.world->advance_time(120000);  // beyond session timeout: all material stale
        tb.world->replay_range(0, lastSeq);
        tb.world->run_until_quiescent();
        if (tb.implant->executed_commands() != executedBefore ||
            tb.implant->flash().total_writes() != writesBefore ||
            tb.implant->session_established())
            ++v.replayAccepted;
    }
    return v;
}

}  // namespace imdsec::harness
