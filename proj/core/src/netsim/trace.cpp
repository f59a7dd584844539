#include "imdsec/netsim/trace.hpp"

#include <sstream>

namespace imdsec::netsim {

const char* trace_action_name(TraceAction a) {
    switch (a) {
        case TraceAction::Send: return "send";
        case TraceAction::Deliver: return "deliver";
        case TraceAction::Modify: return "modify";
        case TraceAction::Drop: return "drop";
        case TraceAction::Inject: return "inject";
        case TraceAction::Replay: return "replay";
        case TraceAction::Blocked: return "blocked";
        case TraceAction::Timer: return "timer";
        case TraceAction::Kick: return "kick";
    }
    return "?";
}

std::string TraceEvent::to_line() const {
    std::ostringstream os;
    os << seq << ' ' << timeMs << ' ' << entities::channel_name(channel) << ' ' << src.hex() << ' '
       << dst.hex() << ' ' << trace_action_name(action) << ' ' << msgType << ' '
       << to_hex(BytesView(frame.data(), frame.size()));
    return os.str();
}

std::string Trace::to_string() const {
    std::string out;
    for (const auto& ev : events_) {
        out += ev.to_line();
        out += '\n';
    }
    return out;
}

std::vector<TraceEvent> Trace::sends_in(std::uint64_t seqFrom, std::uint64_t seqTo) const {
    std::vector<TraceEvent> out;
    for (const auto& ev : events_) {
        if (ev.seq < seqFrom || ev.seq > seqTo) continue;
        if (ev.action != TraceAction::Send) continue;
        if (ev.channel != Channel::RF && ev.channel != Channel::Internet) continue;
        out.push_back(ev);
    }
    return out;
}

}  // namespace imdsec::netsim
