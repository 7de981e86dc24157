#include "evpnsim/controller.hpp"

#include <algorithm>

namespace evpnsim {

void ControllerConfig::validate() const {
    if (poll_interval_s <= 0) throw Error("controller poll_interval_s must be > 0");
    if (congestion_threshold <= 0 || congestion_threshold > 1) {
        throw Error("controller congestion_threshold must be in (0, 1]");
    }
    if (hold_polls < 1) throw Error("controller hold_polls must be >= 1");
    if (oob_delay_s < 0) throw Error("controller oob_delay_s must be >= 0");
}

StatsPoller::StatsPoller(Engine& engine, Network& net, double interval_s)
    : engine_(engine), net_(net), interval_s_(interval_s),
      prev_bytes_(net.topology().link_count(), 0) {}

void StatsPoller::start(SimTime until) {
    if (engine_.now() + interval_s_ <= until) {
        engine_.schedule_in(interval_s_, ControlFn([this, until] { tick(until); }));
    }
}

void StatsPoller::tick(SimTime until) {
    SimTime now = engine_.now();
    LinkStatsMap stats;
    const Topology& topo = net_.topology();
    for (LinkIdx l = 0; l < topo.link_count(); ++l) {
        std::uint64_t total = net_.bytes_carried(l, now);
        double delta = static_cast<double>(total - prev_bytes_[l]);
        prev_bytes_[l] = total;
        stats[l] = LinkStats{delta, delta * 8.0 / (topo.link(l).bandwidth_bps * interval_s_)};
    }
    if (on_interval) on_interval(now, stats);
    start(until);
}

SdnController::SdnController(Engine& engine, const Topology& topo,
                             const std::vector<MulticastTree>& trees, Vni vni,
                             ElectionSystem& election, ControllerConfig cfg)
    : engine_(engine), topo_(topo), trees_(trees), vni_(vni), election_(election),
      cfg_(cfg) {
    cfg_.validate();
    if (trees_.empty()) throw Error("controller needs at least one candidate tree");
}

void SdnController::set_initial(TreeIdx active_tree) {
    active_ = active_tree;
    df_ = trees_[active_tree].pe;
}

TreeIdx SdnController::default_tree_for(NodeIdx pe) const {
    TreeIdx best = kInvalidIndex;
    for (TreeIdx t = 0; t < trees_.size(); ++t) {
        if (trees_[t].pe != pe) continue;
        if (best == kInvalidIndex ||
            trees_[t].links.size() < trees_[best].links.size() ||
            (trees_[t].links.size() == trees_[best].links.size() &&
             trees_[t].id < trees_[best].id)) {
            best = t;
        }
    }
    if (best == kInvalidIndex) {
        throw Error("PE '" + topo_.node(pe).id + "' has no candidate tree for vni " +
                    std::to_string(vni_));
    }
    return best;
}

void SdnController::issue_command(DfCommand::Action action, NodeIdx pe, SimTime issue_at) {
    DfCommand cmd{pe, vni_, action, issue_at, issue_at + cfg_.oob_delay_s};
    commands_.push_back(cmd);
    engine_.schedule(cmd.delivered_at, ControlFn([this, cmd] {
        if (cmd.action == DfCommand::Action::kBlock) {
            election_.command_block(cmd.target_pe, cmd.vni);
        } else {
            election_.command_unblock(cmd.target_pe, cmd.vni);
        }
    }));
}

void SdnController::apply_tree_switch(TreeIdx old_tree, TreeIdx new_tree) {
    SimTime now = engine_.now();
    NodeIdx old_pe = trees_[old_tree].pe;
    NodeIdx new_pe = trees_[new_tree].pe;
    // Forwarding rules land together with the first command wave; the new
    // ingress only opens afterwards (block before unblock).
    engine_.schedule(now + cfg_.oob_delay_s, ControlFn([this, new_tree] {
        if (on_rules_installed) on_rules_installed(vni_, new_tree);
    }));
    if (new_pe != old_pe) {
        issue_command(DfCommand::Action::kBlock, old_pe, now);
        issue_command(DfCommand::Action::kUnblock, new_pe, now + cfg_.oob_delay_s);
        df_ = new_pe;
    }
    active_ = new_tree;
}

void SdnController::on_poll(SimTime now, const LinkStatsMap& stats) {
    if (active_ == kInvalidIndex) throw Error("controller polled before set_initial");
    last_weights_.clear();
    TreeIdx best = active_;
    double w_min = 0;
    for (TreeIdx t = 0; t < trees_.size(); ++t) {
        double w = tree_weight(topo_, trees_[t], stats);
        last_weights_[t] = w;
        if (t == 0 || w < w_min) {
            w_min = w;
            best = t;
        }
    }
    double w_active = last_weights_[active_];
    if (w_active <= w_min) best = active_;  // keep the active tree on ties
    bool breach = false;
    for (LinkIdx l : trees_[active_].links) {
        auto it = stats.find(l);
        if (it != stats.end() && it->second.utilization > cfg_.congestion_threshold) {
            breach = true;
            break;
        }
    }
    bool condition = !suspended_ && breach && w_min < w_active;
    violation_streak_ = condition ? violation_streak_ + 1 : 0;
    TreeDecision decision{now, vni_, false, active_, w_active, w_min, breach,
                          violation_streak_};
    if (violation_streak_ >= cfg_.hold_polls) {
        apply_tree_switch(active_, best);
        violation_streak_ = 0;
        decision.switched = true;
        decision.chosen = best;
        decision.streak = 0;
    }
    decisions_.push_back(decision);
}

void SdnController::set_df(NodeIdx pe) {
    if (topo_.node(pe).role != NodeRole::kPe) {
        throw Error("set_df target '" + topo_.node(pe).id + "' is not a PE");
    }
    TreeIdx target = default_tree_for(pe);  // throws when pe is outside the EVI
    suspended_ = true;
    if (pe == df_) return;
    apply_tree_switch(active_, target);
}

void SdnController::resume_dynamic() {
    suspended_ = false;
    violation_streak_ = 0;
}

void SdnController::on_pe_joined(NodeIdx pe) {
    if (cfg_.move_df_to_new_pe) set_df(pe);
}

}  // namespace evpnsim
