#pragma once

// Traffic program execution (constant-rate, stepped ramps, BUM flooding
// sources) and sink-side accounting of unique deliveries, duplicates and
// losses. BUM streams track per-sequence copy counts so offered packets can
// be fully classified at end of run.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evpnsim/engine.hpp"
#include "evpnsim/topology.hpp"

namespace evpnsim {

struct RampSpec {
    double step_bps = 0;
    double step_duration_s = 0;
    double max_bps = 0;
};

struct StreamSpec {
    std::string name;
    PacketKind kind = PacketKind::kBackground;
    std::string src;
    std::string dst;  // background only
    Vni vni = 0;      // BUM only
    double rate_bps = 0;
    std::uint32_t pkt_size_bytes = 1500;
    double start_s = 0;
    double stop_s = 0;
    std::optional<RampSpec> ramp;

    void validate() const;
};

struct StreamTotals {
    std::string name;
    PacketKind kind = PacketKind::kBackground;
    std::uint64_t offered = 0;
    std::uint64_t received_total = 0;
    std::uint64_t received_unique = 0;
    std::uint64_t duplicates = 0;
    std::uint64_t lost = 0;       // offered - received_unique - in_flight
    std::uint64_t in_flight = 0;  // copies still traveling at end of run
    std::uint64_t blocked = 0;    // sequences whose last copy died at a blocked PE
    std::uint64_t dropped = 0;    // sequences with a tail-dropped copy
    double loss_pct = 0;
};

class SinkAccounting {
public:
    StreamIdx register_stream(const StreamSpec& spec);

    void on_offered(StreamIdx stream, std::uint64_t seq);
    // The arriving copy was consumed and `out_copies` copies were spawned.
    void on_fanout(StreamIdx stream, std::uint64_t seq, int out_copies);
    void on_queue_drop(StreamIdx stream, std::uint64_t seq);
    void on_blocked(StreamIdx stream, std::uint64_t seq);
    void on_delivery(StreamIdx stream, std::uint64_t seq, TreeIdx via_tree);
    void on_background_delivered(StreamIdx stream, std::uint64_t seq);

    // Classifies undelivered sequences and fills the loss columns.
    std::vector<StreamTotals> finalize();

    std::uint64_t fifo_violations() const { return fifo_violations_; }

private:
    struct SeqState {
        std::int32_t alive = 0;
        bool delivered = false;
        bool dropped = false;
        bool blocked = false;
    };
    struct StreamState {
        StreamSpec spec;
        StreamTotals totals;
        std::vector<SeqState> seqs;                    // BUM only
        std::map<TreeIdx, std::uint64_t> last_seq;     // FIFO check per path
        bool any_delivery = false;
    };

    SeqState& seq_state(StreamIdx stream, std::uint64_t seq);

    std::vector<StreamState> streams_;
    std::uint64_t fifo_violations_ = 0;
};

// Runs the emission schedule of every stream; packets are handed to the
// injection hook which owns first-hop transmission.
class TrafficProgram {
public:
    TrafficProgram(Engine& engine, SinkAccounting& acct);

    StreamIdx add_stream(const StreamSpec& spec);
    const StreamSpec& spec(StreamIdx s) const { return streams_[s].spec; }
    std::size_t stream_count() const { return streams_.size(); }

    // Schedules the first wake-up of every stream.
    void start();
    // StreamEmit dispatch target.
    void handle_emit(StreamIdx stream);

    double current_rate(StreamIdx stream, SimTime t) const;

    // Injection: builds the wire packet and transmits the first hop.
    std::function<void(StreamIdx, Packet&&)> inject;

private:
    struct SourceState {
        StreamSpec spec;
        StreamIdx acct_idx = kInvalidIndex;
        std::uint64_t next_seq = 0;
    };

    Engine& engine_;
    SinkAccounting& acct_;
    std::vector<SourceState> streams_;
};

}  // namespace evpnsim
