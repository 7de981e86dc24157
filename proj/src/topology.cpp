#include "evpnsim/topology.hpp"

#include <algorithm>
#include <queue>
#include <set>

namespace evpnsim {

const char* to_string(NodeRole role) {
    switch (role) {
    case NodeRole::kPe: return "PE";
    case NodeRole::kSpine: return "SPINE";
    case NodeRole::kTor: return "TOR";
    case NodeRole::kHost: return "HOST";
    case NodeRole::kCore: return "CORE";
    }
    return "?";
}

NodeRole node_role_from_string(const std::string& s) {
    if (s == "PE") return NodeRole::kPe;
    if (s == "SPINE") return NodeRole::kSpine;
    if (s == "TOR") return NodeRole::kTor;
    if (s == "HOST") return NodeRole::kHost;
    if (s == "CORE") return NodeRole::kCore;
    throw Error("unknown node role '" + s + "'");
}

NodeIdx Topology::add_node(const std::string& id, NodeRole role) {
    if (node_by_id_.count(id)) {
        throw Error("duplicate node id '" + id + "'");
    }
    NodeIdx idx = static_cast<NodeIdx>(nodes_.size());
    nodes_.push_back(Node{id, role, -1});
    node_by_id_[id] = idx;
    out_links_.emplace_back();
    return idx;
}

LinkIdx Topology::add_directed_link(const std::string& a, const std::string& b,
                                    double bandwidth_bps, double prop_delay_s,
                                    std::uint32_t queue_capacity,
                                    bool permanently_congested) {
    auto ia = try_find_node(a);
    auto ib = try_find_node(b);
    if (!ia) throw Error("link endpoint '" + a + "' is not a declared node");
    if (!ib) throw Error("link endpoint '" + b + "' is not a declared node");
    if (*ia == *ib) throw Error("link '" + a + "->" + b + "' connects a node to itself");
    if (bandwidth_bps <= 0) throw Error("link '" + a + "->" + b + "' has non-positive bandwidth");
    if (prop_delay_s < 0) throw Error("link '" + a + "->" + b + "' has negative delay");
    if (queue_capacity < 1) throw Error("link '" + a + "->" + b + "' has queue capacity < 1");
    if (link_by_pair_.count({*ia, *ib})) {
        throw Error("duplicate link '" + a + "->" + b + "'");
    }
    LinkIdx idx = static_cast<LinkIdx>(links_.size());
    links_.push_back(Link{a + "->" + b, *ia, *ib, bandwidth_bps, prop_delay_s,
                          queue_capacity, permanently_congested, kInvalidIndex});
    link_by_pair_[{*ia, *ib}] = idx;
    out_links_[*ia].push_back(idx);
    return idx;
}

LinkIdx Topology::add_duplex_link(const std::string& a, const std::string& b,
                                  double bandwidth_bps, double prop_delay_s,
                                  std::uint32_t queue_capacity,
                                  bool permanently_congested) {
    LinkIdx fwd = add_directed_link(a, b, bandwidth_bps, prop_delay_s,
                                    queue_capacity, permanently_congested);
    add_directed_link(b, a, bandwidth_bps, prop_delay_s, queue_capacity,
                      permanently_congested);
    return fwd;
}

void Topology::validate() {
    for (auto& link : links_) {
        auto rev = link_by_pair_.find({link.dst, link.src});
        if (rev == link_by_pair_.end()) {
            throw Error("link '" + link.id + "' has no reverse link");
        }
        link.reverse = rev->second;
    }
    pes_.clear();
    spines_.clear();
    tors_.clear();
    for (NodeIdx i = 0; i < nodes_.size(); ++i) {
        switch (nodes_[i].role) {
        case NodeRole::kPe: pes_.push_back(i); break;
        case NodeRole::kSpine: spines_.push_back(i); break;
        case NodeRole::kTor: tors_.push_back(i); break;
        default: break;
        }
    }
    auto by_id = [this](NodeIdx a, NodeIdx b) { return nodes_[a].id < nodes_[b].id; };
    std::sort(pes_.begin(), pes_.end(), by_id);
    std::sort(spines_.begin(), spines_.end(), by_id);
    std::sort(tors_.begin(), tors_.end(), by_id);
    for (std::size_t i = 0; i < pes_.size(); ++i) {
        nodes_[pes_[i]].ordinal = static_cast<int>(i);
    }
    // Deterministic fan-out order everywhere downstream.
    for (auto& out : out_links_) {
        std::sort(out.begin(), out.end(), [this](LinkIdx a, LinkIdx b) {
            return links_[a].id < links_[b].id;
        });
    }
    validated_ = true;
}

NodeIdx Topology::find_node(const std::string& id) const {
    auto it = node_by_id_.find(id);
    if (it == node_by_id_.end()) throw Error("unknown node '" + id + "'");
    return it->second;
}

std::optional<NodeIdx> Topology::try_find_node(const std::string& id) const {
    auto it = node_by_id_.find(id);
    if (it == node_by_id_.end()) return std::nullopt;
    return it->second;
}

LinkIdx Topology::find_link(NodeIdx src, NodeIdx dst) const {
    auto it = link_by_pair_.find({src, dst});
    if (it == link_by_pair_.end()) {
        throw Error("unknown link '" + nodes_[src].id + "->" + nodes_[dst].id + "'");
    }
    return it->second;
}

namespace {

// Layered BFS keeping, per node, the lexicographically smallest link-id
// sequence among hop-count shortest paths. Parent choices form a tree, so
// unions of extracted paths are trees as well.
struct PathSearch {
    std::vector<int> dist;
    std::vector<std::vector<LinkIdx>> path;

    PathSearch(const Topology& topo, NodeIdx src, bool for_tree)
        : dist(topo.node_count(), -1), path(topo.node_count()) {
        auto id_seq = [&](const std::vector<LinkIdx>& p) {
            std::vector<std::string> ids;
            ids.reserve(p.size());
            for (LinkIdx l : p) ids.push_back(topo.link(l).id);
            return ids;
        };
        dist[src] = 0;
        std::vector<NodeIdx> frontier{src};
        while (!frontier.empty()) {
            std::vector<NodeIdx> next;
            for (NodeIdx u : frontier) {
                if (u != src && topo.node(u).role == NodeRole::kHost) continue;
                for (LinkIdx l : topo.links_from(u)) {
                    const Link& link = topo.link(l);
                    if (link.permanently_congested) continue;
                    NodeIdx v = link.dst;
                    if (dist[v] != -1 && dist[v] != dist[u] + 1) continue;
                    std::vector<LinkIdx> cand = path[u];
                    cand.push_back(l);
                    if (dist[v] == -1) {
                        dist[v] = dist[u] + 1;
                        path[v] = std::move(cand);
                        next.push_back(v);
                    } else if (id_seq(cand) < id_seq(path[v])) {
                        path[v] = std::move(cand);
                    }
                }
            }
            frontier = std::move(next);
        }
        (void)for_tree;
    }
};

}  // namespace

std::vector<LinkIdx> Topology::shortest_path(NodeIdx src, NodeIdx dst, bool for_tree) const {
    PathSearch search(*this, src, for_tree);
    if (search.dist[dst] == -1) return {};
    return search.path[dst];
}

Topology build_topology(const TopologySpec& spec) {
    Topology topo;
    if (spec.preset == "fig6") {
        topo.add_node("PE-1", NodeRole::kPe);
        topo.add_node("PE-2", NodeRole::kPe);
        topo.add_node("CE-1", NodeRole::kSpine);
        topo.add_node("CE-2", NodeRole::kSpine);
        topo.add_node("TOR-1", NodeRole::kTor);
        topo.add_node("TOR-2", NodeRole::kTor);
        topo.add_node("RR", NodeRole::kCore);
        topo.add_node("sink-1", NodeRole::kHost);
        topo.add_node("source-1", NodeRole::kHost);
        topo.add_node("source-2", NodeRole::kHost);
        topo.add_node("bum-source", NodeRole::kHost);
        const double bw = 1e9, delay = 1e-3;
        const std::uint32_t cap = 100;
        topo.add_duplex_link("source-1", "RR", bw, delay, cap);
        topo.add_duplex_link("bum-source", "RR", bw, delay, cap);
        topo.add_duplex_link("RR", "PE-1", bw, delay, cap);
        topo.add_duplex_link("RR", "PE-2", bw, delay, cap);
        topo.add_duplex_link("PE-1", "CE-1", bw, delay, cap);
        topo.add_duplex_link("PE-2", "CE-2", bw, delay, cap);
        // Cross links of the multi-homed segment; kept out of every tree.
        topo.add_duplex_link("PE-1", "CE-2", bw, delay, cap, true);
        topo.add_duplex_link("PE-2", "CE-1", bw, delay, cap, true);
        topo.add_duplex_link("CE-1", "TOR-1", bw, delay, cap);
        topo.add_duplex_link("CE-1", "TOR-2", bw, delay, cap);
        topo.add_duplex_link("CE-2", "TOR-1", bw, delay, cap);
        topo.add_duplex_link("CE-2", "TOR-2", bw, delay, cap);
        topo.add_duplex_link("TOR-1", "sink-1", bw, delay, cap);
        topo.add_duplex_link("TOR-2", "source-2", bw, delay, cap);
    } else if (!spec.preset.empty()) {
        throw Error("unknown topology preset '" + spec.preset + "'");
    } else {
        for (const auto& n : spec.nodes) {
            topo.add_node(n.id, node_role_from_string(n.role));
        }
        for (const auto& l : spec.links) {
            topo.add_duplex_link(l.a, l.b, l.bandwidth_bps, l.delay_s,
                                 l.queue_pkts, l.permanently_congested);
        }
    }
    topo.validate();
    return topo;
}

LogicalNetwork resolve_network(const Topology& topo, const LogicalNetworkSpec& spec) {
    if (spec.vni == 0) throw Error("network vni must be a positive integer");
    if (spec.esi.empty()) throw Error("network esi must be non-empty");
    if (spec.evi.empty()) throw Error("network evi must be non-empty");
    if (spec.tors.empty()) throw Error("network needs at least one participating TOR");
    LogicalNetwork net;
    net.vni = spec.vni;
    net.esi = spec.esi;
    net.evi = spec.evi;
    for (const auto& id : spec.tors) {
        NodeIdx n = topo.find_node(id);
        if (topo.node(n).role != NodeRole::kTor) {
            throw Error("network tor '" + id + "' is not a TOR node");
        }
        net.participating_tors.push_back(n);
    }
    for (const auto& id : spec.subscribers) {
        NodeIdx n = topo.find_node(id);
        if (topo.node(n).role != NodeRole::kHost) {
            throw Error("network subscriber '" + id + "' is not a HOST node");
        }
        net.subscriber_hosts.push_back(n);
    }
    std::sort(net.participating_tors.begin(), net.participating_tors.end());
    std::sort(net.subscriber_hosts.begin(), net.subscriber_hosts.end());
    return net;
}

namespace {

// Orients an undirected edge set away from `root` and fills out_links.
void orient_from(const Topology& topo, NodeIdx root,
                 const std::set<std::pair<NodeIdx, NodeIdx>>& edges,
                 MulticastTree* tree) {
    tree->out_links.assign(topo.node_count(), {});
    std::vector<char> visited(topo.node_count(), 0);
    std::queue<NodeIdx> q;
    q.push(root);
    visited[root] = 1;
    while (!q.empty()) {
        NodeIdx u = q.front();
        q.pop();
        for (LinkIdx l : topo.links_from(u)) {
            NodeIdx v = topo.link(l).dst;
            auto key = std::minmax(u, v);
            if (!edges.count({key.first, key.second})) continue;
            if (visited[v]) continue;
            visited[v] = 1;
            tree->out_links[u].push_back(l);
            tree->links.push_back(l);
            q.push(v);
        }
    }
    std::sort(tree->links.begin(), tree->links.end());
}

}  // namespace

std::vector<MulticastTree> enumerate_trees(const Topology& topo, const LogicalNetwork& net) {
    if (topo.pes().empty()) throw Error("topology has no PE nodes");
    if (topo.spines().empty()) throw Error("topology has no spine nodes");
    for (NodeIdx tor : net.participating_tors) {
        if (topo.node(tor).role != NodeRole::kTor) {
            throw Error("participating node '" + topo.node(tor).id + "' is not a TOR");
        }
    }
    std::vector<MulticastTree> trees;
    for (NodeIdx rp : topo.spines()) {
        PathSearch search(topo, rp, true);
        for (NodeIdx pe : topo.pes()) {
            if (search.dist[pe] == -1) continue;
            bool all_reachable = true;
            std::set<std::pair<NodeIdx, NodeIdx>> edges;
            auto add_path = [&](NodeIdx dst) {
                for (LinkIdx l : search.path[dst]) {
                    const Link& link = topo.link(l);
                    auto key = std::minmax(link.src, link.dst);
                    edges.insert({key.first, key.second});
                }
            };
            for (NodeIdx tor : net.participating_tors) {
                if (search.dist[tor] == -1) {
                    all_reachable = false;
                    break;
                }
            }
            if (!all_reachable) continue;
            add_path(pe);
            for (NodeIdx tor : net.participating_tors) add_path(tor);
            MulticastTree tree;
            tree.id = topo.node(rp).id + "|" + topo.node(pe).id;
            tree.rp = rp;
            tree.pe = pe;
            tree.vni = net.vni;
            tree.leaves = net.participating_tors;
            orient_from(topo, pe, edges, &tree);
            trees.push_back(std::move(tree));
        }
    }
    if (trees.empty()) {
        throw Error("no multicast tree exists for any (spine, PE) pair of vni " +
                    std::to_string(net.vni));
    }
    std::sort(trees.begin(), trees.end(),
              [](const MulticastTree& a, const MulticastTree& b) { return a.id < b.id; });
    return trees;
}

double tree_weight(const Topology& topo, const MulticastTree& tree, const LinkStatsMap& stats) {
    double total = 0;
    for (LinkIdx l : tree.links) {
        if (topo.link(l).permanently_congested) {
            total += kCongestedWeight;
            continue;
        }
        auto it = stats.find(l);
        if (it == stats.end()) {
            throw Error("missing link stats for '" + topo.link(l).id + "'");
        }
        total += it->second.utilization;
    }
    return total;
}

void validate_tree(const Topology& topo, const MulticastTree& tree, const LogicalNetwork& net) {
    if (topo.node(tree.pe).role != NodeRole::kPe) {
        throw Error("tree '" + tree.id + "' ingress is not a PE");
    }
    if (topo.node(tree.rp).role != NodeRole::kSpine) {
        throw Error("tree '" + tree.id + "' RP is not a spine");
    }
    std::set<std::pair<NodeIdx, NodeIdx>> edges;
    std::set<NodeIdx> nodes;
    for (LinkIdx l : tree.links) {
        const Link& link = topo.link(l);
        if (link.permanently_congested) {
            throw Error("tree '" + tree.id + "' uses permanently congested link " + link.id);
        }
        auto key = std::minmax(link.src, link.dst);
        if (!edges.insert({key.first, key.second}).second) {
            throw Error("tree '" + tree.id + "' repeats edge " + link.id);
        }
        nodes.insert(link.src);
        nodes.insert(link.dst);
    }
    if (edges.size() + 1 != nodes.size()) {
        throw Error("tree '" + tree.id + "' is not acyclic");
    }
    // Connectivity from the ingress PE over the oriented links.
    std::set<NodeIdx> seen{tree.pe};
    std::queue<NodeIdx> q;
    q.push(tree.pe);
    while (!q.empty()) {
        NodeIdx u = q.front();
        q.pop();
        for (LinkIdx l : tree.out_links[u]) {
            NodeIdx v = topo.link(l).dst;
            if (seen.insert(v).second) q.push(v);
        }
    }
    if (seen.size() != nodes.size()) {
        throw Error("tree '" + tree.id + "' is not connected from its PE");
    }
    if (!nodes.count(tree.rp)) throw Error("tree '" + tree.id + "' does not span its RP");
    for (NodeIdx tor : net.participating_tors) {
        if (!nodes.count(tor)) {
            throw Error("tree '" + tree.id + "' does not span TOR " + topo.node(tor).id);
        }
    }
    if (tree.leaves != net.participating_tors) {
        throw Error("tree '" + tree.id + "' leaves do not match the logical network");
    }
}

}  // namespace evpnsim
