#pragma once

#include <string>
#include <vector>

#include "evpnsim/controller.hpp"
#include "evpnsim/election.hpp"
#include "evpnsim/traffic.hpp"

namespace evpnsim {

// One completed polling interval: per-link bytes serialized and the derived
// utilization, indexed by LinkIdx.
struct IntervalRecord {
    SimTime t_end = 0;
    std::vector<double> bytes_by_link;
    std::vector<double> util_by_link;
};

struct SimulationReport {
    std::vector<StreamTotals> streams;
    std::vector<DfTransition> df_log;
    int df_change_count = 0;
    std::vector<SimTime> df_change_times;
    std::vector<IntervalRecord> intervals;
    std::vector<TreeDecision> decisions;      // SDN runs only
    std::vector<DfCommand> commands;          // SDN runs only
    std::vector<HandshakeSession> sessions;   // handshake runs only
    std::vector<std::string> tree_ids;
    std::vector<std::string> link_ids;
    std::vector<std::string> invariant_failures;
    std::uint64_t events_executed = 0;
    double wall_seconds = 0;

    const StreamTotals& stream(const std::string& name) const;
    int link_index(const std::string& id) const;  // -1 when absent
};

// One (run, sweep-point) result over the BUM stream of the scenario.
struct ResultRow {
    int run = 0;
    std::string algo;
    double inter_pe_delay_ms = 0;
    double bum_rate_mbps = 0;
    std::uint64_t offered = 0;
    std::uint64_t received_total = 0;
    std::uint64_t received_unique = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t lost = 0;
    double loss_pct = 0;
    int df_change_count = 0;
    std::vector<double> df_change_times;
};

}  // namespace evpnsim
