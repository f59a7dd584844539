#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "imdsec/crypto/suite.hpp"
#include "imdsec/entities/common.hpp"

namespace imdsec::netsim {

using entities::Channel;
using entities::Envelope;

/// Symbolic (Dolev-Yao) term store. The adversary records every value it
/// can see on RF/Internet, decomposes frames into fields, and opens
/// ciphertexts only when it holds the key. It never brute-forces crypto.
class Knowledge {
public:
    void observe(const Envelope& env);

    /// Grant a key (models an out-of-band compromise in oracle tests) and
    /// re-close the knowledge set over all recorded blobs.
    void grant_key(const SymmetricKey& key);

    bool contains(BytesView value) const;
    bool contains_key(const SymmetricKey& k) const {
        return contains(BytesView(k.raw.data(), k.raw.size()));
    }
    std::size_t size() const { return values_.size(); }

    const std::vector<Bytes>& blobs() const { return blobs_; }

    /// Recomputes the closure from scratch (observed terms + keys) and
    /// compares with the incrementally maintained set; the soundness
    /// cross-check used by property tests.
    bool closure_matches_recomputation() const;

private:
    void learn_value(BytesView v);
    void learn_blob(BytesView blob);
    void open_with_keys(BytesView blob, std::set<std::string>& into) const;
    void close_over_blobs();

    std::set<std::string> values_;     // hex of every derivable term
    std::vector<Bytes> blobs_;         // ciphertexts / opaque payloads, replayable
    std::vector<SymmetricKey> keys_;   // keys the adversary holds
    std::vector<Bytes> observedRaw_;   // raw frames in observation order
};

/// One tampering rule: fires on the nth frame matching the trigger.
struct AdversaryRule {
    enum class Action : std::uint8_t {
        Drop,
        CorruptByte,       // flip one byte of the encoded frame
        ReplayEarlier,     // additionally re-deliver a previously observed frame
        Duplicate,         // deliver twice
        SubstituteEarlier, // suppress this frame, deliver a recorded one instead
    };

    std::optional<Channel> channel;
    std::optional<wire::MsgType> msgType;
    std::uint32_t matchIndex = 0;
    Action action = Action::Drop;
    std::uint32_t param = 0;  // byte offset (corrupt) or observation index (replay)

    // bookkeeping
    std::uint32_t seen = 0;
    bool exhausted = false;
};

/// Rule-driven man-in-the-middle for the RF and Internet channels. OOB and
/// card-slot traffic never reaches it.
class Adversary {
public:
    struct Decision {
        bool deliverOriginal = true;
        std::optional<Bytes> modifiedFrame;  // decoded downstream if possible
        std::vector<Envelope> extra;         // replays / duplicates
        bool tampered() const { return !deliverOriginal || modifiedFrame.has_value(); }
    };

    void add_rule(AdversaryRule rule) { rules_.push_back(rule); }
    void set_stolen(const EntityId& id) { stolen_.insert(id); }
    bool is_stolen(const EntityId& id) const { return stolen_.count(id) > 0; }

    Decision process(const Envelope& env);

    Knowledge& knowledge() { return knowledge_; }
    const Knowledge& knowledge() const { return knowledge_; }

    const std::vector<Envelope>& observed() const { return observedEnvs_; }

private:
    Knowledge knowledge_;
    std::vector<AdversaryRule> rules_;
    std::vector<Envelope> observedEnvs_;
    std::set<EntityId> stolen_;
};

}  // namespace imdsec::netsim
