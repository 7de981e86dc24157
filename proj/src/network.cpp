#include "evpnsim/network.hpp"

namespace evpnsim {

Network::Network(Engine& engine, const Topology& topo)
    : engine_(engine), topo_(topo), queues_(topo.link_count()) {}

void Network::settle(QueueState& q, SimTime t) {
    while (!q.pending.empty() && q.pending.front().finish <= t) {
        q.bytes_done += q.pending.front().bytes;
        q.pending.pop_front();
    }
}

bool Network::transmit(LinkIdx link, Packet pkt) {
    const Link& l = topo_.link(link);
    QueueState& q = queues_[link];
    SimTime now = engine_.now();
    settle(q, now);
    if (q.pending.size() >= l.queue_capacity) {
        ++q.drops;
        if (on_drop) on_drop(link, pkt);
        return false;
    }
    SimTime start = std::max(now, q.busy_until);
    SimTime finish = start + pkt.size_bytes * 8.0 / l.bandwidth_bps;
    q.busy_until = finish;
    q.pending.push_back(Pending{finish, pkt.size_bytes});
    engine_.schedule(finish + l.prop_delay_s, PacketArrival{link, std::move(pkt)});
    return true;
}

std::uint64_t Network::bytes_carried(LinkIdx link, SimTime t) {
    QueueState& q = queues_[link];
    settle(q, t);
    return q.bytes_done;
}

std::uint32_t Network::occupancy(LinkIdx link, SimTime t) {
    QueueState& q = queues_[link];
    settle(q, t);
    return static_cast<std::uint32_t>(q.pending.size());
}

}  // namespace evpnsim
