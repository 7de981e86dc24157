#include "evpnsim/engine.hpp"

namespace evpnsim {

void Engine::schedule(SimTime t, EventAction action) {
    if (t < now_) {
        throw Error("event scheduled in the past (t=" + std::to_string(t) +
                    ", now=" + std::to_string(now_) + ")");
    }
    queue_.push(Event{t, next_seq_++, std::move(action)});
}

void Engine::run_until(SimTime t_end) {
    while (!queue_.empty() && queue_.top().time <= t_end) {
        Event ev = std::move(const_cast<Event&>(queue_.top()));
        queue_.pop();
        now_ = ev.time;
        ++executed_;
        switch (ev.action.index()) {
        case 0: {
            auto& arrival = std::get<PacketArrival>(ev.action);
            on_packet(arrival.link, std::move(arrival.pkt));
            break;
        }
        case 1:
            on_emit(std::get<StreamEmit>(ev.action).stream);
            break;
        default:
            std::get<ControlFn>(ev.action)();
            break;
        }
    }
    if (t_end > now_) now_ = t_end;
}

}  // namespace evpnsim
