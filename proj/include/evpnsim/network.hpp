#pragma once

// Data plane: per-directed-link FIFO queues with serialization and
// propagation delay, tail drop at capacity, and byte/drop counters.

#include <deque>
#include <functional>

#include "evpnsim/engine.hpp"
#include "evpnsim/topology.hpp"

namespace evpnsim {

class Network {
public:
    Network(Engine& engine, const Topology& topo);

    // Queues the packet on the link. When the queue is at capacity the
    // packet is dropped (on_drop fires, returns false); otherwise it departs
    // at max(now, busy_until) + size*8/bandwidth and arrives prop_delay
    // later as a PacketArrival event.
    bool transmit(LinkIdx link, Packet pkt);

    // Bytes fully serialized onto the link up to time t.
    std::uint64_t bytes_carried(LinkIdx link, SimTime t);
    // Packets accepted but not yet fully serialized at time t.
    std::uint32_t occupancy(LinkIdx link, SimTime t);
    std::uint64_t drop_count(LinkIdx link) const { return queues_[link].drops; }

    const Topology& topology() const { return topo_; }

    // Accounting hook for tail drops; set by the simulation.
    std::function<void(LinkIdx, const Packet&)> on_drop;

private:
    struct Pending {
        SimTime finish;
        std::uint32_t bytes;
    };
    struct QueueState {
        SimTime busy_until = 0;
        std::deque<Pending> pending;  // accepted, serialization not finished
        std::uint64_t bytes_done = 0;
        std::uint64_t drops = 0;
    };

    void settle(QueueState& q, SimTime t);

    Engine& engine_;
    const Topology& topo_;
    std::vector<QueueState> queues_;
};

}  // namespace evpnsim
