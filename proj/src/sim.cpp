#include "evpnsim/sim.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <sstream>

namespace evpnsim {

TreeIdx default_tree_of(const std::vector<MulticastTree>& trees, NodeIdx pe) {
    TreeIdx best = kInvalidIndex;
    for (TreeIdx t = 0; t < trees.size(); ++t) {
        if (trees[t].pe != pe) continue;
        if (best == kInvalidIndex ||
            trees[t].links.size() < trees[best].links.size() ||
            (trees[t].links.size() == trees[best].links.size() &&
             trees[t].id < trees[best].id)) {
            best = t;
        }
    }
    return best;
}

std::string find_dual_forwarder(const std::vector<DfTransition>& log) {
    std::map<Vni, std::set<NodeIdx>> forwarding;
    for (const DfTransition& tr : log) {
        auto& pes = forwarding[tr.vni];
        if (tr.unblocked) {
            pes.insert(tr.pe);
            if (pes.size() > 1) {
                std::ostringstream os;
                os << "two PEs forward vni " << tr.vni << " at t=" << tr.t;
                return os.str();
            }
        } else {
            pes.erase(tr.pe);
        }
    }
    return "";
}

Simulation::Simulation(const RunConfig& cfg)
    : cfg_(cfg),
      topo_(build_topology(cfg.topology)),
      net_(resolve_network(topo_, cfg.network)),
      trees_(enumerate_trees(topo_, net_)),
      rng_(cfg.seed) {
    if (cfg_.duration_s <= 0) throw Error("duration_s must be > 0");
    for (const auto& tree : trees_) validate_tree(topo_, tree, net_);

    network_ = std::make_unique<Network>(engine_, topo_);
    traffic_ = std::make_unique<TrafficProgram>(engine_, acct_);
    election_ = std::make_unique<ElectionSystem>(engine_, topo_, net_, cfg_.election, rng_);

    if (cfg_.initial_df.empty()) throw Error("initial_df must name a PE");
    initial_df_ = topo_.find_node(cfg_.initial_df);
    if (topo_.node(initial_df_).role != NodeRole::kPe) {
        throw Error("initial_df '" + cfg_.initial_df + "' is not a PE");
    }
    std::vector<NodeIdx> actives;
    for (const auto& id : cfg_.active_pes) actives.push_back(topo_.find_node(id));
    election_->seed_quiescent(actives, initial_df_);

    pe_ingress_tree_.assign(topo_.node_count(), kInvalidIndex);
    for (NodeIdx pe : topo_.pes()) pe_ingress_tree_[pe] = default_tree_of(trees_, pe);
    if (pe_ingress_tree_[initial_df_] == kInvalidIndex) {
        throw Error("initial DF has no candidate multicast tree");
    }

    if (cfg_.election.algo == DfAlgo::kSdn) {
        controller_ = std::make_unique<SdnController>(engine_, topo_, trees_, net_.vni,
                                                      *election_, cfg_.controller);
        controller_->set_initial(pe_ingress_tree_[initial_df_]);
        controller_->on_rules_installed = [this](Vni, TreeIdx tree) {
            pe_ingress_tree_[trees_[tree].pe] = tree;
        };
        election_->on_pe_joined = [this](NodeIdx pe) { controller_->on_pe_joined(pe); };
    }

    double interval = cfg_.stats_interval_s > 0 ? cfg_.stats_interval_s
                                                : cfg_.controller.poll_interval_s;
    poller_ = std::make_unique<StatsPoller>(engine_, *network_, interval);
    poller_->on_interval = [this, interval](SimTime t, const LinkStatsMap& stats) {
        IntervalRecord rec;
        rec.t_end = t;
        rec.bytes_by_link.resize(topo_.link_count());
        rec.util_by_link.resize(topo_.link_count());
        for (const auto& [l, s] : stats) {
            rec.bytes_by_link[l] = s.bytes_carried;
            rec.util_by_link[l] = s.utilization;
        }
        intervals_.push_back(std::move(rec));
        if (controller_) controller_->on_poll(t, stats);
    };

    // Traffic sources: resolve routes and first hops up front.
    for (const StreamSpec& spec : cfg_.streams) {
        StreamIdx idx = traffic_->add_stream(spec);
        NodeIdx src = topo_.find_node(spec.src);
        std::vector<LinkIdx> route;
        LinkIdx first;
        if (spec.kind == PacketKind::kBackground) {
            NodeIdx dst = topo_.find_node(spec.dst);
            if (src == dst) throw Error("stream '" + spec.name + "': src equals dst");
            route = topo_.shortest_path(src, dst, false);
            if (route.empty()) {
                throw Error("stream '" + spec.name + "': no route from " + spec.src +
                            " to " + spec.dst);
            }
            first = route[0];
        } else {
            if (spec.vni != net_.vni) {
                throw Error("stream '" + spec.name + "': vni " + std::to_string(spec.vni) +
                            " is not the configured logical network");
            }
            const auto& ups = topo_.links_from(src);
            if (ups.size() != 1) {
                throw Error("stream '" + spec.name + "': BUM source must have exactly one uplink");
            }
            first = ups[0];
        }
        routes_.push_back(std::move(route));
        first_link_.push_back(first);
        (void)idx;
    }

    subs_by_tor_.assign(topo_.node_count(), {});
    for (NodeIdx host : net_.subscriber_hosts) {
        NodeIdx tor = kInvalidIndex;
        for (LinkIdx l : topo_.links_from(host)) {
            if (topo_.node(topo_.link(l).dst).role == NodeRole::kTor) {
                tor = topo_.link(l).dst;
                break;
            }
        }
        if (tor == kInvalidIndex) {
            throw Error("subscriber '" + topo_.node(host).id + "' is not attached to a TOR");
        }
        subs_by_tor_[tor].push_back(host);
    }

    leaf_of_tree_.assign(trees_.size(), std::vector<char>(topo_.node_count(), 0));
    for (TreeIdx t = 0; t < trees_.size(); ++t) {
        for (NodeIdx leaf : trees_[t].leaves) leaf_of_tree_[t][leaf] = 1;
    }

    for (const TimedEvent& ev : cfg_.events) {
        if (!ev.insert_pe.empty() == !ev.set_df.empty()) {
            throw Error("timed event needs exactly one of insert_pe / set_df");
        }
        if (!ev.set_df.empty() && cfg_.election.algo != DfAlgo::kSdn) {
            throw Error("set_df events require algo = sdn");
        }
        NodeIdx pe = topo_.find_node(ev.insert_pe.empty() ? ev.set_df : ev.insert_pe);
        if (topo_.node(pe).role != NodeRole::kPe) {
            throw Error("timed event target '" + topo_.node(pe).id + "' is not a PE");
        }
    }

    wire_forwarding();
}

void Simulation::wire_forwarding() {
    engine_.on_packet = [this](LinkIdx link, Packet&& pkt) { handle_packet(link, std::move(pkt)); };
    engine_.on_emit = [this](StreamIdx s) { traffic_->handle_emit(s); };
    traffic_->inject = [this](StreamIdx s, Packet&& pkt) { inject(s, std::move(pkt)); };
    network_->on_drop = [this](LinkIdx, const Packet& pkt) {
        acct_.on_queue_drop(pkt.stream, pkt.seq);
    };
}

void Simulation::inject(StreamIdx source, Packet&& pkt) {
    pkt.src = topo_.link(first_link_[source]).src;
    pkt.hop = 1;
    if (pkt.kind == PacketKind::kBum) pkt.trail.push_back(pkt.src);
    network_->transmit(first_link_[source], std::move(pkt));
}

void Simulation::fanout_tree(NodeIdx node, Packet&& pkt) {
    const auto& outs = trees_[pkt.tree].out_links[node];
    acct_.on_fanout(pkt.stream, pkt.seq, static_cast<int>(outs.size()));
    for (std::size_t i = 0; i + 1 < outs.size(); ++i) {
        network_->transmit(outs[i], Packet(pkt));  // copy for every extra branch
    }
    if (!outs.empty()) network_->transmit(outs.back(), std::move(pkt));
}

void Simulation::handle_packet(LinkIdx link, Packet&& pkt) {
    NodeIdx node = topo_.link(link).dst;
    const Node& n = topo_.node(node);
    if (pkt.kind == PacketKind::kBum) pkt.trail.push_back(node);

    if (pkt.kind == PacketKind::kBackground) {
        if (n.role == NodeRole::kHost) {
            acct_.on_background_delivered(pkt.stream, pkt.seq);
            return;
        }
        const auto& route = routes_[pkt.stream];
        if (pkt.hop < route.size()) {
            LinkIdx next = route[pkt.hop];
            ++pkt.hop;
            network_->transmit(next, std::move(pkt));
        } else {
            acct_.on_queue_drop(pkt.stream, pkt.seq);  // ran off its route
        }
        return;
    }

    switch (n.role) {
    case NodeRole::kCore: {
        // Provider-side flood: every attached PE gets a copy.
        LinkIdx reverse = topo_.link(link).reverse;
        std::vector<LinkIdx> targets;
        for (LinkIdx l : topo_.links_from(node)) {
            if (l == reverse) continue;
            if (topo_.node(topo_.link(l).dst).role == NodeRole::kPe) targets.push_back(l);
        }
        acct_.on_fanout(pkt.stream, pkt.seq, static_cast<int>(targets.size()));
        for (std::size_t i = 0; i + 1 < targets.size(); ++i) {
            network_->transmit(targets[i], Packet(pkt));
        }
        if (!targets.empty()) network_->transmit(targets.back(), std::move(pkt));
        break;
    }
    case NodeRole::kPe: {
        if (pkt.tree == kInvalidIndex) {
            // Ingress from the provider side: only the DF forwards.
            if (election_->is_unblocked(node, pkt.vni)) {
                pkt.tree = pe_ingress_tree_[node];
                fanout_tree(node, std::move(pkt));
            } else {
                acct_.on_blocked(pkt.stream, pkt.seq);
            }
        } else {
            fanout_tree(node, std::move(pkt));  // transit hop of the tree
        }
        break;
    }
    case NodeRole::kSpine:
    case NodeRole::kTor: {
        if (pkt.tree == kInvalidIndex) {
            acct_.on_fanout(pkt.stream, pkt.seq, 0);  // stray unstamped frame
            break;
        }
        if (n.role == NodeRole::kTor && leaf_of_tree_[pkt.tree][node]) {
            for (NodeIdx host : subs_by_tor_[node]) {
                (void)host;  // decapsulated and handed off at the VTEP
                if (cfg_.verify_tree_paths) {
                    const MulticastTree& tree = trees_[pkt.tree];
                    auto it = std::find(pkt.trail.begin(), pkt.trail.end(), tree.pe);
                    bool ok = it != pkt.trail.end();
                    for (; ok && it + 1 != pkt.trail.end(); ++it) {
                        bool hop_on_tree = false;
                        for (LinkIdx l : tree.out_links[*it]) {
                            if (topo_.link(l).dst == *(it + 1)) {
                                hop_on_tree = true;
                                break;
                            }
                        }
                        ok = hop_on_tree;
                    }
                    if (!ok) ++tree_path_violations_;
                }
                acct_.on_delivery(pkt.stream, pkt.seq, pkt.tree);
            }
        }
        fanout_tree(node, std::move(pkt));
        break;
    }
    case NodeRole::kHost:
        acct_.on_fanout(pkt.stream, pkt.seq, 0);  // BUM never rides host links
        break;
    }
}

void Simulation::schedule_events() {
    for (const TimedEvent& ev : cfg_.events) {
        if (!ev.insert_pe.empty()) {
            NodeIdx pe = topo_.find_node(ev.insert_pe);
            engine_.schedule(ev.at, ControlFn([this, pe] { election_->activate_pe(pe); }));
        } else {
            NodeIdx pe = topo_.find_node(ev.set_df);
            engine_.schedule(ev.at, ControlFn([this, pe] { controller_->set_df(pe); }));
        }
    }
}

void Simulation::collect_checks(SimulationReport& report) {
    for (const StreamTotals& t : report.streams) {
        if (t.kind == PacketKind::kBum &&
            t.received_unique + t.in_flight + t.lost != t.offered) {
            report.invariant_failures.push_back("conservation violated for stream " + t.name);
        }
    }
    if (acct_.fifo_violations() > 0) {
        report.invariant_failures.push_back(
            std::to_string(acct_.fifo_violations()) + " out-of-order deliveries on a single path");
    }
    if (tree_path_violations_ > 0) {
        report.invariant_failures.push_back(
            std::to_string(tree_path_violations_) + " BUM deliveries off the stamped tree");
    }
    double max_pkt_bits = 0;
    for (const StreamSpec& s : cfg_.streams) {
        max_pkt_bits = std::max(max_pkt_bits, s.pkt_size_bytes * 8.0);
    }
    for (const IntervalRecord& rec : intervals_) {
        for (LinkIdx l = 0; l < topo_.link_count(); ++l) {
            double cap_bits = topo_.link(l).bandwidth_bps * poller_->interval() + max_pkt_bits;
            if (rec.bytes_by_link[l] * 8.0 > cap_bits * (1 + 1e-9)) {
                report.invariant_failures.push_back("link " + topo_.link(l).id +
                                                    " exceeded line rate in an interval");
            }
        }
    }
    if (cfg_.election.algo != DfAlgo::kServiceCarving) {
        std::string dual = find_dual_forwarder(report.df_log);
        if (!dual.empty()) report.invariant_failures.push_back(dual);
    }
}

SimulationReport Simulation::run() {
    auto wall_start = std::chrono::steady_clock::now();
    traffic_->start();
    poller_->start(cfg_.duration_s);
    schedule_events();
    engine_.run_until(cfg_.duration_s);

    SimulationReport report;
    report.streams = acct_.finalize();
    report.df_log = election_->df_log();
    report.sessions = election_->sessions();
    if (controller_) {
        report.decisions = controller_->decisions();
        report.commands = controller_->commands();
    }
    report.intervals = std::move(intervals_);
    for (const auto& tree : trees_) report.tree_ids.push_back(tree.id);
    for (LinkIdx l = 0; l < topo_.link_count(); ++l) report.link_ids.push_back(topo_.link(l).id);
    report.events_executed = engine_.events_executed();

    // DF holder changes for the configured vni, measured from the seeded DF.
    NodeIdx holder = initial_df_;
    for (const DfTransition& tr : report.df_log) {
        if (tr.vni != net_.vni || !tr.unblocked) continue;
        if (tr.t == 0 && tr.pe == holder) continue;  // seeding baseline
        if (tr.pe != holder) {
            holder = tr.pe;
            ++report.df_change_count;
            report.df_change_times.push_back(tr.t);
        }
    }

    collect_checks(report);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    return report;
}

const StreamTotals& SimulationReport::stream(const std::string& name) const {
    for (const auto& s : streams) {
        if (s.name == name) return s;
    }
    throw Error("no stream named '" + name + "' in the report");
}

int SimulationReport::link_index(const std::string& id) const {
    for (std::size_t i = 0; i < link_ids.size(); ++i) {
        if (link_ids[i] == id) return static_cast<int>(i);
    }
    return -1;
}

}  // namespace evpnsim
