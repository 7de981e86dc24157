#pragma once

// Network graph model: typed nodes, directed full-duplex links, logical
// (VXLAN) networks, and candidate multicast trees for BUM delivery.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evpnsim/types.hpp"

namespace evpnsim {

enum class NodeRole { kPe, kSpine, kTor, kHost, kCore };

const char* to_string(NodeRole role);
NodeRole node_role_from_string(const std::string& s);

struct Node {
    std::string id;
    NodeRole role = NodeRole::kHost;
    // Position in the stable global ordering; assigned 0..n-1 to PEs sorted
    // by id, -1 for everything else.
    int ordinal = -1;
};

struct Link {
    std::string id;  // "<src>-><dst>"
    NodeIdx src = kInvalidIndex;
    NodeIdx dst = kInvalidIndex;
    double bandwidth_bps = 0;
    double prop_delay_s = 0;
    std::uint32_t queue_capacity = 0;
    bool permanently_congested = false;
    LinkIdx reverse = kInvalidIndex;
};

struct LogicalNetwork {
    Vni vni = 0;  // doubles as the Ethernet Tag
    std::string esi;
    std::string evi;
    std::vector<NodeIdx> participating_tors;
    std::vector<NodeIdx> subscriber_hosts;  // hosts that receive BUM for this vni
};

// One candidate BUM delivery tree: a spine RP, one ingress PE and the links
// reaching every participating TOR. `links` are oriented in the forwarding
// direction (away from the ingress PE over the undirected spanning tree).
struct MulticastTree {
    std::string id;  // "<rp>|<pe>", unique per logical network
    NodeIdx rp = kInvalidIndex;
    NodeIdx pe = kInvalidIndex;
    Vni vni = 0;
    std::vector<LinkIdx> links;
    std::vector<NodeIdx> leaves;
    // links leaving each node under the from-PE orientation; empty for nodes
    // not in the tree. Indexed by NodeIdx.
    std::vector<std::vector<LinkIdx>> out_links;
};

struct LinkStats {
    double bytes_carried = 0;   // over the last polling interval
    double utilization = 0;     // bytes*8 / (bandwidth*interval)
};

using LinkStatsMap = std::map<LinkIdx, LinkStats>;

// Sentinel added to a tree weight per permanently-congested link; larger
// than any sum of real utilizations.
inline constexpr double kCongestedWeight = 1.0e6;

struct NodeSpec {
    std::string id;
    std::string role;
};

struct LinkSpec {
    std::string a;
    std::string b;
    double bandwidth_bps = 1e9;
    double delay_s = 1e-3;
    std::uint32_t queue_pkts = 100;
    bool permanently_congested = false;
};

// Topology section of a scenario: either a named preset or explicit rows.
struct TopologySpec {
    std::string preset;  // "" when explicit
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;  // each row creates both directions
};

class Topology {
public:
    NodeIdx add_node(const std::string& id, NodeRole role);
    // Adds both directions of a full-duplex link; returns the a->b index.
    LinkIdx add_duplex_link(const std::string& a, const std::string& b,
                            double bandwidth_bps, double prop_delay_s,
                            std::uint32_t queue_capacity,
                            bool permanently_congested = false);
    // Adds a single directed link; reverse must exist by validate() time.
    LinkIdx add_directed_link(const std::string& a, const std::string& b,
                              double bandwidth_bps, double prop_delay_s,
                              std::uint32_t queue_capacity,
                              bool permanently_congested = false);

    // Checks link endpoints, reverse-link pairing and parameter ranges, and
    // assigns PE ordinals. Must be called once after construction.
    void validate();

    NodeIdx find_node(const std::string& id) const;  // throws on miss
    std::optional<NodeIdx> try_find_node(const std::string& id) const;
    LinkIdx find_link(NodeIdx src, NodeIdx dst) const;  // throws on miss

    const Node& node(NodeIdx i) const { return nodes_[i]; }
    const Link& link(LinkIdx i) const { return links_[i]; }
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t link_count() const { return links_.size(); }

    const std::vector<NodeIdx>& pes() const { return pes_; }
    const std::vector<NodeIdx>& spines() const { return spines_; }
    const std::vector<NodeIdx>& tors() const { return tors_; }
    const std::vector<LinkIdx>& links_from(NodeIdx n) const { return out_links_[n]; }

    // Hop-count shortest path src->dst, ties broken by the lexicographically
    // smallest link-id sequence. Skips permanently-congested links and, when
    // for_tree is set, HOST nodes as transit. Empty when unreachable.
    std::vector<LinkIdx> shortest_path(NodeIdx src, NodeIdx dst, bool for_tree) const;

private:
    std::vector<Node> nodes_;
    std::vector<Link> links_;
    std::map<std::string, NodeIdx> node_by_id_;
    std::map<std::pair<NodeIdx, NodeIdx>, LinkIdx> link_by_pair_;
    std::vector<std::vector<LinkIdx>> out_links_;
    std::vector<NodeIdx> pes_, spines_, tors_;
    bool validated_ = false;
};

// Builds and validates a topology from a scenario section. Preset "fig6" is
// the two-PE / two-spine / two-TOR data center with core-side sources, all
// links 1 Gbps / 1 ms, and the two PE-spine cross links of the multi-homed
// segment marked permanently congested.
Topology build_topology(const TopologySpec& spec);

// Resolves a logical-network description (names) against a topology.
struct LogicalNetworkSpec {
    Vni vni = 0;
    std::string esi;
    std::string evi;
    std::vector<std::string> tors;
    std::vector<std::string> subscribers;
};
LogicalNetwork resolve_network(const Topology& topo, const LogicalNetworkSpec& spec);

// One candidate tree per (spine RP, PE) pair for which every participating
// TOR and the PE are reachable from the RP. Ordered by tree id.
std::vector<MulticastTree> enumerate_trees(const Topology& topo, const LogicalNetwork& net);

// Sum of per-link utilization over the tree's directed links; congested
// links contribute kCongestedWeight each. Throws on a missing stats entry.
double tree_weight(const Topology& topo, const MulticastTree& tree, const LinkStatsMap& stats);

// Structural check used by tests and --check: spanning, acyclic, leaves
// match, single ingress PE.
void validate_tree(const Topology& topo, const MulticastTree& tree, const LogicalNetwork& net);

}  // namespace evpnsim
