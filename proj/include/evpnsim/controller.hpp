#pragma once

// Centralized control plane: polls link counters, weighs candidate trees,
// switches the active multicast tree under a threshold + hold rule, and
// commands PE forwarding state over an out-of-band channel.

#include <functional>
#include <map>
#include <vector>

#include "evpnsim/election.hpp"
#include "evpnsim/engine.hpp"
#include "evpnsim/network.hpp"
#include "evpnsim/topology.hpp"

namespace evpnsim {

struct ControllerConfig {
    double poll_interval_s = 5.0;
    double congestion_threshold = 0.95;
    int hold_polls = 2;          // consecutive breached polls before a switch
    double oob_delay_s = 0.001;  // controller-to-PE command delivery
    bool move_df_to_new_pe = false;  // policy: shift the DF to a joining PE

    void validate() const;
};

struct DfCommand {
    enum class Action { kBlock, kUnblock };
    NodeIdx target_pe = kInvalidIndex;
    Vni vni = 0;
    Action action = Action::kBlock;
    SimTime issued_at = 0;
    SimTime delivered_at = 0;
};

struct TreeDecision {
    SimTime t = 0;
    Vni vni = 0;
    bool switched = false;
    TreeIdx chosen = kInvalidIndex;  // the active tree after the decision
    double active_weight = 0;
    double min_weight = 0;
    bool threshold_breached = false;
    int streak = 0;
};

// Periodically derives per-link utilization from the data-plane byte
// counters and hands the snapshot to listeners.
class StatsPoller {
public:
    StatsPoller(Engine& engine, Network& net, double interval_s);

    void start(SimTime until);
    double interval() const { return interval_s_; }

    std::function<void(SimTime, const LinkStatsMap&)> on_interval;

private:
    void tick(SimTime until);

    Engine& engine_;
    Network& net_;
    double interval_s_;
    std::vector<std::uint64_t> prev_bytes_;
};

class SdnController {
public:
    SdnController(Engine& engine, const Topology& topo,
                  const std::vector<MulticastTree>& trees, Vni vni,
                  ElectionSystem& election, ControllerConfig cfg);

    void set_initial(TreeIdx active_tree);

    // One polling round over a utilization snapshot.
    void on_poll(SimTime now, const LinkStatsMap& stats);

    // Deterministic DF selection: block-before-unblock command pair, then
    // dynamic switching stays suspended for the vni until resumed.
    void set_df(NodeIdx pe);
    void resume_dynamic();

    void on_pe_joined(NodeIdx pe);

    TreeIdx active_tree() const { return active_; }
    NodeIdx current_df() const { return df_; }
    bool suspended() const { return suspended_; }
    const std::vector<TreeDecision>& decisions() const { return decisions_; }
    const std::vector<DfCommand>& commands() const { return commands_; }

    // Fires (at rule-installation time) when the ingress tree of a PE
    // changes; the data plane re-stamps from here on.
    std::function<void(Vni, TreeIdx)> on_rules_installed;

    // Candidate tree of a PE with the fewest links (ties by id). Throws when
    // the PE has no candidate tree for the vni.
    TreeIdx default_tree_for(NodeIdx pe) const;

private:
    void apply_tree_switch(TreeIdx old_tree, TreeIdx new_tree);
    void issue_command(DfCommand::Action action, NodeIdx pe, SimTime issue_at);

    Engine& engine_;
    const Topology& topo_;
    const std::vector<MulticastTree>& trees_;
    Vni vni_;
    ElectionSystem& election_;
    ControllerConfig cfg_;

    TreeIdx active_ = kInvalidIndex;
    NodeIdx df_ = kInvalidIndex;
    int violation_streak_ = 0;
    bool suspended_ = false;
    std::map<TreeIdx, double> last_weights_;
    std::vector<TreeDecision> decisions_;
    std::vector<DfCommand> commands_;
};

}  // namespace evpnsim
