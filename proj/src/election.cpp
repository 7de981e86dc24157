#include "evpnsim/election.hpp"

#include <algorithm>

namespace evpnsim {

NodeIdx modulo_elect(Vni tag, const std::vector<NodeIdx>& candidates) {
    if (candidates.empty()) throw Error("DF election over an empty candidate list");
    return candidates[tag % candidates.size()];
}

std::map<NodeIdx, std::uint64_t> fairness_histogram(const std::vector<Vni>& tags,
                                                    const std::vector<NodeIdx>& candidates) {
    if (candidates.empty()) throw Error("fairness histogram over an empty candidate list");
    std::map<NodeIdx, std::uint64_t> counts;
    for (NodeIdx pe : candidates) counts[pe] = 0;
    for (Vni tag : tags) ++counts[modulo_elect(tag, candidates)];
    return counts;
}

const char* to_string(DfAlgo algo) {
    switch (algo) {
    case DfAlgo::kServiceCarving: return "service_carving";
    case DfAlgo::kHandshake: return "handshake";
    case DfAlgo::kSdn: return "sdn";
    }
    return "?";
}

DfAlgo df_algo_from_string(const std::string& s) {
    if (s == "service_carving") return DfAlgo::kServiceCarving;
    if (s == "handshake") return DfAlgo::kHandshake;
    if (s == "sdn") return DfAlgo::kSdn;
    throw Error("unknown algorithm '" + s + "' (expected service_carving, handshake or sdn)");
}

ElectionSystem::ElectionSystem(Engine& engine, const Topology& topo,
                               const LogicalNetwork& net, const ElectionConfig& cfg,
                               std::mt19937_64& rng)
    : engine_(engine), topo_(topo), cfg_(cfg), esi_(net.esi), vnis_{net.vni} {
    // One draw per PE in ordinal order keeps jitter independent of when (or
    // whether) a PE is activated.
    jitter_by_ordinal_.reserve(topo.pes().size());
    for (std::size_t i = 0; i < topo.pes().size(); ++i) {
        double unit = (rng() >> 11) * 0x1.0p-53;  // [0,1), platform-independent
        jitter_by_ordinal_.push_back(cfg_.jitter_max_s * unit);
    }
    for (NodeIdx pe : topo.pes()) pes_[pe];  // materialize states
}

ElectionSystem::PeState& ElectionSystem::pe_state(NodeIdx pe) {
    auto it = pes_.find(pe);
    if (it == pes_.end()) throw Error("node '" + topo_.node(pe).id + "' is not a PE");
    return it->second;
}

const ElectionSystem::PeState& ElectionSystem::pe_state(NodeIdx pe) const {
    auto it = pes_.find(pe);
    if (it == pes_.end()) throw Error("node '" + topo_.node(pe).id + "' is not a PE");
    return it->second;
}

double ElectionSystem::jitter_of(NodeIdx pe) const {
    return jitter_by_ordinal_[topo_.node(pe).ordinal];
}

bool ElectionSystem::is_unblocked(NodeIdx pe, Vni vni) const {
    const PeState& st = pe_state(pe);
    auto it = st.unblocked.find(vni);
    return it != st.unblocked.end() && it->second;
}

NodeIdx ElectionSystem::elected_at(NodeIdx pe, Vni vni) const {
    const PeState& st = pe_state(pe);
    auto it = st.elected.find(vni);
    return it == st.elected.end() ? kInvalidIndex : it->second;
}

void ElectionSystem::set_forwarding(NodeIdx pe, Vni vni, bool unblocked) {
    PeState& st = pe_state(pe);
    bool& cur = st.unblocked[vni];
    if (cur == unblocked) return;
    cur = unblocked;
    df_log_.push_back(DfTransition{engine_.now(), log_seq_++, pe, vni, unblocked});
}

void ElectionSystem::seed_quiescent(const std::vector<NodeIdx>& active_pes, NodeIdx initial_df) {
    std::vector<NodeIdx> sorted = active_pes;
    std::sort(sorted.begin(), sorted.end(), [this](NodeIdx a, NodeIdx b) {
        return topo_.node(a).id < topo_.node(b).id;
    });
    bool df_listed = std::find(sorted.begin(), sorted.end(), initial_df) != sorted.end();
    if (!df_listed) throw Error("initial DF is not among the active PEs");
    rr_routes_[esi_] = sorted;
    for (NodeIdx pe : sorted) {
        PeState& st = pe_state(pe);
        st.active = true;
        st.candidates = sorted;
        st.ever_elected = true;
        for (Vni vni : vnis_) {
            st.elected[vni] = initial_df;
            st.unblocked[vni] = false;
            if (pe == initial_df) set_forwarding(pe, vni, true);
        }
    }
}

void ElectionSystem::add_candidate(PeState& st, NodeIdx pe) {
    auto pos = std::lower_bound(st.candidates.begin(), st.candidates.end(), pe,
                                [this](NodeIdx a, NodeIdx b) {
                                    return topo_.node(a).id < topo_.node(b).id;
                                });
    if (pos != st.candidates.end() && *pos == pe) return;
    st.candidates.insert(pos, pe);
}

void ElectionSystem::arm_timer(NodeIdx pe) {
    PeState& st = pe_state(pe);
    st.timer = engine_.now() + cfg_.timer_s + jitter_of(pe);
    std::uint64_t epoch = ++st.timer_epoch;
    engine_.schedule(*st.timer, ControlFn([this, pe, epoch] {
        PeState& s = pe_state(pe);
        if (!s.active || s.timer_epoch != epoch) return;  // restarted meanwhile
        s.timer.reset();
        run_election(pe);
    }));
}

void ElectionSystem::activate_pe(NodeIdx pe) {
    PeState& st = pe_state(pe);
    st.active = true;
    add_candidate(st, pe);
    if (cfg_.algo == DfAlgo::kSdn) {
        // The controller learns of the PE directly; no distributed election.
        if (on_pe_joined) on_pe_joined(pe);
        return;
    }
    EsRoute route{esi_, pe, engine_.now()};
    bool request = cfg_.algo == DfAlgo::kHandshake;
    engine_.schedule_in(hop_delay(), ControlFn([this, route, request] {
        rr_receive(route, request);
    }));
    arm_timer(pe);
}

void ElectionSystem::rr_receive(const EsRoute& route, bool takeover_request) {
    auto& stored = rr_routes_[route.esi];
    bool known = std::find(stored.begin(), stored.end(), route.origin_pe) != stored.end();
    if (!known) stored.push_back(route.origin_pe);
    for (NodeIdx pe : topo_.pes()) {
        if (pe == route.origin_pe || !pe_state(pe).active) continue;
        engine_.schedule_in(hop_delay(), ControlFn([this, pe, route, takeover_request] {
            pe_receive_route(pe, route);
            if (takeover_request) pe_receive_request(pe, route.origin_pe, vnis_);
        }));
    }
    // Reflect the stored routes of this segment back to the origin.
    for (NodeIdx origin : stored) {
        if (origin == route.origin_pe) continue;
        EsRoute reflected{route.esi, origin, engine_.now()};
        engine_.schedule_in(hop_delay(), ControlFn([this, dst = route.origin_pe, reflected] {
            pe_receive_route(dst, reflected);
        }));
    }
}

void ElectionSystem::pe_receive_route(NodeIdx pe, const EsRoute& route) {
    PeState& st = pe_state(pe);
    if (!st.active) return;
    add_candidate(st, route.origin_pe);
    if (st.timer) return;  // pending timer covers this route
    if (cfg_.reelect_immediately_on_late_route && st.ever_elected) {
        run_election(pe);
    } else {
        arm_timer(pe);
    }
}

void ElectionSystem::advance_session(NodeIdx old_df, NodeIdx new_df, Vni vni,
                                     HandshakePhase phase) {
    for (auto& session : sessions_) {
        if (session.old_df == old_df && session.new_df == new_df && session.vni == vni &&
            session.phase < phase) {
            session.phase = phase;
            return;
        }
    }
    sessions_.push_back(HandshakeSession{old_df, new_df, vni, phase});
}

void ElectionSystem::run_election(NodeIdx pe) {
    PeState& st = pe_state(pe);
    st.ever_elected = true;
    for (Vni vni : vnis_) {
        NodeIdx winner = modulo_elect(vni, st.candidates);
        st.elected[vni] = winner;
        switch (cfg_.algo) {
        case DfAlgo::kServiceCarving:
            set_forwarding(pe, vni, winner == pe);
            break;
        case DfAlgo::kHandshake:
            // Winners wait for a grant; a losing holder hands over directly.
            if (winner != pe && is_unblocked(pe, vni)) {
                set_forwarding(pe, vni, false);
                advance_session(pe, winner, vni, HandshakePhase::kGranted);
                engine_.schedule_in(cfg_.inter_pe_delay_s,
                                    ControlFn([this, winner, from = pe, vni] {
                                        pe_receive_grant(winner, from, {vni});
                                    }));
            }
            break;
        case DfAlgo::kSdn:
            break;
        }
    }
}

void ElectionSystem::pe_receive_request(NodeIdx pe, NodeIdx joiner,
                                        const std::vector<Vni>& vnis) {
    PeState& st = pe_state(pe);
    if (!st.active) return;
    add_candidate(st, joiner);
    std::vector<Vni> granted;
    for (Vni vni : vnis) {
        NodeIdx winner = modulo_elect(vni, st.candidates);
        if (winner == joiner && is_unblocked(pe, vni)) {
            set_forwarding(pe, vni, false);
            granted.push_back(vni);
            advance_session(pe, joiner, vni, HandshakePhase::kGranted);
        }
    }
    if (!granted.empty()) {
        engine_.schedule_in(cfg_.inter_pe_delay_s, ControlFn([this, joiner, from = pe, granted] {
            pe_receive_grant(joiner, from, granted);
        }));
    }
}

void ElectionSystem::pe_receive_grant(NodeIdx pe, NodeIdx from, const std::vector<Vni>& vnis) {
    PeState& st = pe_state(pe);
    if (!st.active) return;
    for (Vni vni : vnis) {
        st.elected[vni] = pe;
        set_forwarding(pe, vni, true);
        advance_session(from, pe, vni, HandshakePhase::kComplete);
    }
}

void ElectionSystem::handshake_transfer(NodeIdx old_df, NodeIdx new_df, Vni vni) {
    if (old_df == new_df) return;
    pe_state(new_df);  // validates
    if (!is_unblocked(old_df, vni)) {
        throw Error("handshake transfer from '" + topo_.node(old_df).id +
                    "' which is not forwarding vni " + std::to_string(vni));
    }
    sessions_.push_back(HandshakeSession{old_df, new_df, vni, HandshakePhase::kRequested});
    engine_.schedule_in(cfg_.inter_pe_delay_s, ControlFn([this, old_df, new_df, vni] {
        pe_receive_request(old_df, new_df, {vni});
    }));
}

void ElectionSystem::command_block(NodeIdx pe, Vni vni) {
    set_forwarding(pe, vni, false);
}

void ElectionSystem::command_unblock(NodeIdx pe, Vni vni) {
    PeState& st = pe_state(pe);
    st.active = true;
    st.elected[vni] = pe;
    set_forwarding(pe, vni, true);
}

}  // namespace evpnsim
