#pragma once

// Assembles one simulation run: topology, data plane, traffic program,
// election machinery and (for SDN runs) the controller, plus the packet
// forwarding logic tying them together.

#include <memory>
#include <random>

#include "evpnsim/controller.hpp"
#include "evpnsim/election.hpp"
#include "evpnsim/network.hpp"
#include "evpnsim/report.hpp"
#include "evpnsim/topology.hpp"
#include "evpnsim/traffic.hpp"

namespace evpnsim {

struct TimedEvent {
    double at = 0;
    std::string insert_pe;  // exactly one of insert_pe / set_df is set
    std::string set_df;
    Vni vni = 0;
};

// Fully resolved configuration of a single run (sweep values substituted).
struct RunConfig {
    TopologySpec topology;
    LogicalNetworkSpec network;
    ElectionConfig election;
    ControllerConfig controller;
    std::vector<StreamSpec> streams;
    double duration_s = 0;
    std::uint64_t seed = 0;
    std::string initial_df;
    std::vector<std::string> active_pes;
    std::vector<TimedEvent> events;
    double stats_interval_s = 0;  // 0: use controller poll interval
    bool verify_tree_paths = true;
};

class Simulation {
public:
    explicit Simulation(const RunConfig& cfg);

    SimulationReport run();

    // Exposed for tests.
    const Topology& topology() const { return topo_; }
    const std::vector<MulticastTree>& trees() const { return trees_; }
    Engine& engine() { return engine_; }
    ElectionSystem& election() { return *election_; }
    SdnController* controller() { return controller_.get(); }
    TreeIdx ingress_tree_of(NodeIdx pe) const { return pe_ingress_tree_[pe]; }

private:
    void wire_forwarding();
    void handle_packet(LinkIdx link, Packet&& pkt);
    void inject(StreamIdx source, Packet&& pkt);
    void fanout_tree(NodeIdx node, Packet&& pkt);
    void schedule_events();
    void collect_checks(SimulationReport& report);

    RunConfig cfg_;
    Topology topo_;
    LogicalNetwork net_;
    std::vector<MulticastTree> trees_;
    std::mt19937_64 rng_;
    Engine engine_;
    std::unique_ptr<Network> network_;
    SinkAccounting acct_;
    std::unique_ptr<TrafficProgram> traffic_;
    std::unique_ptr<ElectionSystem> election_;
    std::unique_ptr<SdnController> controller_;
    std::unique_ptr<StatsPoller> poller_;

    std::vector<TreeIdx> pe_ingress_tree_;          // by NodeIdx
    std::vector<std::vector<NodeIdx>> subs_by_tor_;  // by NodeIdx
    std::vector<std::vector<LinkIdx>> routes_;       // per traffic source
    std::vector<LinkIdx> first_link_;                // per traffic source
    std::vector<std::vector<char>> leaf_of_tree_;    // [tree][node]
    std::vector<IntervalRecord> intervals_;
    std::uint64_t tree_path_violations_ = 0;
    NodeIdx initial_df_ = kInvalidIndex;
};

// Default ingress tree of a PE: fewest links, ties by tree id. Returns
// kInvalidIndex when the PE has none.
TreeIdx default_tree_of(const std::vector<MulticastTree>& trees, NodeIdx pe);

// Scans a DF transition log; returns a description of the first instant
// where two PEs forward the same vni, or an empty string.
std::string find_dual_forwarder(const std::vector<DfTransition>& log);

}  // namespace evpnsim
