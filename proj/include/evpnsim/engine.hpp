#pragma once

// Deterministic discrete-event core. Events run in strict
// (time, insertion_seq) order; equal-time events run in insertion order.

#include <cstdint>
#include <functional>
#include <queue>
#include <variant>
#include <vector>

#include "evpnsim/network_types.hpp"
#include "evpnsim/types.hpp"

namespace evpnsim {

// Packet handed to the data plane when its link traversal completes.
struct PacketArrival {
    LinkIdx link;
    Packet pkt;
};

// Wakes a traffic source to emit its next packet (or re-evaluate its rate).
struct StreamEmit {
    StreamIdx stream;
};

// Control-plane actions (timers, route deliveries, commands, polls).
using ControlFn = std::function<void()>;

using EventAction = std::variant<PacketArrival, StreamEmit, ControlFn>;

class Engine {
public:
    SimTime now() const { return now_; }

    void schedule(SimTime t, EventAction action);
    void schedule_in(SimTime dt, EventAction action) { schedule(now_ + dt, std::move(action)); }

    // Executes every event with time <= t_end, then advances the clock to
    // t_end. An empty queue simply advances the clock.
    void run_until(SimTime t_end);

    std::uint64_t events_executed() const { return executed_; }

    // Dispatch targets, wired once by the simulation before running.
    std::function<void(LinkIdx, Packet&&)> on_packet;
    std::function<void(StreamIdx)> on_emit;

private:
    struct Event {
        SimTime time;
        std::uint64_t seq;
        EventAction action;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };

    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    SimTime now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t executed_ = 0;
};

}  // namespace evpnsim
