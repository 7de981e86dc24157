#pragma once

// Distributed EVPN control plane: ES route exchange through a route
// reflector, per-PE election timers, modulo DF election, and the
// handshake-based DF transfer variant. Control messages travel
// PE -> RR -> PE; each hop costs half the configured inter-PE one-way
// delay, independently of data-plane congestion.

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "evpnsim/engine.hpp"
#include "evpnsim/topology.hpp"

namespace evpnsim {

// (V mod N) election over the ordered candidate list. Throws on empty.
NodeIdx modulo_elect(Vni tag, const std::vector<NodeIdx>& candidates);

// Number of tags each candidate wins under modulo_elect.
std::map<NodeIdx, std::uint64_t> fairness_histogram(const std::vector<Vni>& tags,
                                                    const std::vector<NodeIdx>& candidates);

enum class DfAlgo { kServiceCarving, kHandshake, kSdn };
const char* to_string(DfAlgo algo);
DfAlgo df_algo_from_string(const std::string& s);

struct ElectionConfig {
    DfAlgo algo = DfAlgo::kServiceCarving;
    double timer_s = 3.0;          // T; RFC default, scaled down by presets
    double jitter_max_s = 0.005;   // J; per-PE draw from the run seed
    double inter_pe_delay_s = 0;   // end-to-end one-way PE-to-PE delay
    // When set, a route arriving after the timer already expired re-elects
    // immediately instead of arming a fresh T timer.
    bool reelect_immediately_on_late_route = false;
};

struct EsRoute {
    std::string esi;
    NodeIdx origin_pe = kInvalidIndex;
    SimTime sent_at = 0;
};

// Block/unblock transition of one PE for one vni; `order` breaks ties among
// equal-time entries.
struct DfTransition {
    SimTime t = 0;
    std::uint64_t order = 0;
    NodeIdx pe = kInvalidIndex;
    Vni vni = 0;
    bool unblocked = false;
};

enum class HandshakePhase { kRequested, kGranted, kComplete };

struct HandshakeSession {
    NodeIdx old_df = kInvalidIndex;
    NodeIdx new_df = kInvalidIndex;
    Vni vni = 0;
    HandshakePhase phase = HandshakePhase::kRequested;
};

class ElectionSystem {
public:
    ElectionSystem(Engine& engine, const Topology& topo, const LogicalNetwork& net,
                   const ElectionConfig& cfg, std::mt19937_64& rng);

    // Installs a converged pre-run state: every listed PE active with the
    // full candidate set, no timers pending, initial_df unblocked for every
    // vni and the rest blocked. Logged as the t=0 baseline.
    void seed_quiescent(const std::vector<NodeIdx>& active_pes, NodeIdx initial_df);

    // ES discovery at engine.now(): broadcasts the ES route via the RR and
    // arms the local timer. Re-invoking re-sends the route and restarts the
    // timer. In handshake mode the route carries a takeover request.
    void activate_pe(NodeIdx pe);

    // Direct DF transfer between two PEs (handshake message exchange).
    // No-op when old_df == new_df.
    void handshake_transfer(NodeIdx old_df, NodeIdx new_df, Vni vni);

    bool is_active(NodeIdx pe) const { return pe_state(pe).active; }
    bool is_unblocked(NodeIdx pe, Vni vni) const;
    NodeIdx elected_at(NodeIdx pe, Vni vni) const;

    // Controller command surface; invoked at command delivery time.
    void command_block(NodeIdx pe, Vni vni);
    void command_unblock(NodeIdx pe, Vni vni);

    const std::vector<DfTransition>& df_log() const { return df_log_; }
    const std::vector<HandshakeSession>& sessions() const { return sessions_; }
    const std::vector<NodeIdx>& candidates_of(NodeIdx pe) const { return pe_state(pe).candidates; }
    std::optional<SimTime> timer_deadline(NodeIdx pe) const { return pe_state(pe).timer; }
    double jitter_of(NodeIdx pe) const;

    // SDN-mode hook: fires when a PE joins the segment.
    std::function<void(NodeIdx)> on_pe_joined;

private:
    struct PeState {
        bool active = false;
        std::vector<NodeIdx> candidates;
        std::optional<SimTime> timer;
        std::uint64_t timer_epoch = 0;
        bool ever_elected = false;
        std::map<Vni, NodeIdx> elected;
        std::map<Vni, bool> unblocked;
    };

    PeState& pe_state(NodeIdx pe);
    const PeState& pe_state(NodeIdx pe) const;
    double hop_delay() const { return cfg_.inter_pe_delay_s / 2; }

    void set_forwarding(NodeIdx pe, Vni vni, bool unblocked);
    void advance_session(NodeIdx old_df, NodeIdx new_df, Vni vni, HandshakePhase phase);
    void arm_timer(NodeIdx pe);
    void run_election(NodeIdx pe);
    void rr_receive(const EsRoute& route, bool takeover_request);
    void pe_receive_route(NodeIdx pe, const EsRoute& route);
    void pe_receive_request(NodeIdx pe, NodeIdx joiner, const std::vector<Vni>& vnis);
    void pe_receive_grant(NodeIdx pe, NodeIdx from, const std::vector<Vni>& vnis);
    void add_candidate(PeState& st, NodeIdx pe);

    Engine& engine_;
    const Topology& topo_;
    ElectionConfig cfg_;
    std::string esi_;
    std::vector<Vni> vnis_;
    std::map<NodeIdx, PeState> pes_;
    std::map<std::string, std::vector<NodeIdx>> rr_routes_;  // per-ESI stored origins
    std::vector<double> jitter_by_ordinal_;
    std::vector<DfTransition> df_log_;
    std::vector<HandshakeSession> sessions_;
    std::uint64_t log_seq_ = 0;
};

}  // namespace evpnsim
