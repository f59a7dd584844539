#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imdsec/entities/common.hpp"

namespace imdsec::netsim {

using entities::Channel;
using entities::SimTimeMs;

enum class TraceAction : std::uint8_t {
    Send,      // entity handed the frame to the channel
    Deliver,   // frame handed to the destination entity
    Modify,    // adversary tampered before delivery
    Drop,      // adversary suppressed the frame
    Inject,    // adversary-originated frame
    Replay,    // re-injection of a recorded frame
    Blocked,   // OOB frame without touch contact
    Timer,
    Kick,
};

const char* trace_action_name(TraceAction a);

/// One line per event: seq, time, channel, src, dst, action, type, frame hex.
struct TraceEvent {
    std::uint64_t seq = 0;
    SimTimeMs timeMs = 0;
    Channel channel = Channel::RF;
    EntityId src{};
    EntityId dst{};
    TraceAction action = TraceAction::Send;
    std::string msgType;
    Bytes frame;

    std::string to_line() const;
};

class Trace {
public:
    void record(TraceEvent ev) { events_.push_back(std::move(ev)); }
    const std::vector<TraceEvent>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }

    std::string to_string() const;

    /// Frames the adversary could have recorded (Send events on RF/Internet).
    std::vector<TraceEvent> sends_in(std::uint64_t seqFrom, std::uint64_t seqTo) const;

private:
    std::vector<TraceEvent> events_;
};

}  // namespace imdsec::netsim
