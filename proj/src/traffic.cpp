#include "evpnsim/traffic.hpp"

#include <cmath>

namespace evpnsim {

void StreamSpec::validate() const {
    if (name.empty()) throw Error("stream needs a name");
    if (kind == PacketKind::kControl) throw Error("stream '" + name + "': control streams are not configurable");
    if (!(start_s < stop_s)) throw Error("stream '" + name + "': start must be before stop");
    if (rate_bps < 0) throw Error("stream '" + name + "': negative rate");
    if (pkt_size_bytes == 0) throw Error("stream '" + name + "': packet size must be > 0");
    if (kind == PacketKind::kBum && vni == 0) throw Error("stream '" + name + "': BUM stream needs a vni");
    if (kind == PacketKind::kBackground && dst.empty()) {
        throw Error("stream '" + name + "': background stream needs a destination");
    }
    if (ramp) {
        if (ramp->step_bps <= 0) throw Error("stream '" + name + "': ramp step must be > 0");
        if (ramp->step_duration_s <= 0) throw Error("stream '" + name + "': ramp step duration must be > 0");
        if (ramp->max_bps < rate_bps) throw Error("stream '" + name + "': ramp max below base rate");
    }
}

StreamIdx SinkAccounting::register_stream(const StreamSpec& spec) {
    StreamState st;
    st.spec = spec;
    st.totals.name = spec.name;
    st.totals.kind = spec.kind;
    streams_.push_back(std::move(st));
    return static_cast<StreamIdx>(streams_.size() - 1);
}

SinkAccounting::SeqState& SinkAccounting::seq_state(StreamIdx stream, std::uint64_t seq) {
    auto& seqs = streams_[stream].seqs;
    if (seq >= seqs.size()) throw Error("accounting saw an unknown sequence number");
    return seqs[seq];
}

void SinkAccounting::on_offered(StreamIdx stream, std::uint64_t seq) {
    StreamState& st = streams_[stream];
    ++st.totals.offered;
    if (st.spec.kind == PacketKind::kBum) {
        if (seq != st.seqs.size()) throw Error("BUM sequence numbers must be dense");
        st.seqs.push_back(SeqState{1, false, false, false});
    }
}

void SinkAccounting::on_fanout(StreamIdx stream, std::uint64_t seq, int out_copies) {
    StreamState& st = streams_[stream];
    if (st.spec.kind != PacketKind::kBum) return;
    SeqState& s = seq_state(stream, seq);
    s.alive += out_copies - 1;
    if (s.alive < 0) throw Error("copy accounting went negative for stream " + st.spec.name);
}

void SinkAccounting::on_queue_drop(StreamIdx stream, std::uint64_t seq) {
    StreamState& st = streams_[stream];
    if (st.spec.kind == PacketKind::kBum) {
        SeqState& s = seq_state(stream, seq);
        --s.alive;
        s.dropped = true;
        if (s.alive < 0) throw Error("copy accounting went negative for stream " + st.spec.name);
    } else {
        ++st.totals.dropped;
    }
}

void SinkAccounting::on_blocked(StreamIdx stream, std::uint64_t seq) {
    StreamState& st = streams_[stream];
    if (st.spec.kind != PacketKind::kBum) return;
    SeqState& s = seq_state(stream, seq);
    --s.alive;
    s.blocked = true;
    if (s.alive < 0) throw Error("copy accounting went negative for stream " + st.spec.name);
}

void SinkAccounting::on_delivery(StreamIdx stream, std::uint64_t seq, TreeIdx via_tree) {
    StreamState& st = streams_[stream];
    ++st.totals.received_total;
    auto [it, first_on_path] = st.last_seq.try_emplace(via_tree, seq);
    if (!first_on_path) {
        if (seq <= it->second) ++fifo_violations_;
        it->second = seq;
    }
    if (st.spec.kind == PacketKind::kBum) {
        SeqState& s = seq_state(stream, seq);
        if (!s.delivered) {
            s.delivered = true;
            ++st.totals.received_unique;
        }
    } else {
        ++st.totals.received_unique;
    }
}

void SinkAccounting::on_background_delivered(StreamIdx stream, std::uint64_t seq) {
    on_delivery(stream, seq, kInvalidIndex);
}

std::vector<StreamTotals> SinkAccounting::finalize() {
    std::vector<StreamTotals> out;
    for (auto& st : streams_) {
        StreamTotals& t = st.totals;
        t.duplicates = t.received_total - t.received_unique;
        if (st.spec.kind == PacketKind::kBum) {
            t.in_flight = 0;
            t.blocked = 0;
            t.dropped = 0;
            for (const SeqState& s : st.seqs) {
                if (s.delivered) continue;
                if (s.alive > 0) {
                    ++t.in_flight;
                } else if (s.dropped) {
                    ++t.dropped;
                } else if (s.blocked) {
                    ++t.blocked;
                }
            }
            t.lost = t.offered - t.received_unique - t.in_flight;
        } else {
            t.in_flight = t.offered - t.received_unique - t.dropped;
            t.lost = t.dropped;
        }
        t.loss_pct = t.offered ? 100.0 * static_cast<double>(t.lost) / static_cast<double>(t.offered) : 0.0;
        out.push_back(t);
    }
    return out;
}

TrafficProgram::TrafficProgram(Engine& engine, SinkAccounting& acct)
    : engine_(engine), acct_(acct) {}

StreamIdx TrafficProgram::add_stream(const StreamSpec& spec) {
    spec.validate();
    SourceState st;
    st.spec = spec;
    st.acct_idx = acct_.register_stream(spec);
    streams_.push_back(std::move(st));
    return static_cast<StreamIdx>(streams_.size() - 1);
}

void TrafficProgram::start() {
    for (StreamIdx i = 0; i < streams_.size(); ++i) {
        SimTime first = std::max(streams_[i].spec.start_s, engine_.now());
        engine_.schedule(first, StreamEmit{i});
    }
}

double TrafficProgram::current_rate(StreamIdx stream, SimTime t) const {
    const StreamSpec& spec = streams_[stream].spec;
    if (!spec.ramp) return spec.rate_bps;
    // Plateau index; the epsilon keeps boundary wake-ups on the new plateau.
    double step = std::floor((t - spec.start_s) / spec.ramp->step_duration_s + 1e-9);
    if (step < 0) step = 0;
    return std::min(spec.rate_bps + step * spec.ramp->step_bps, spec.ramp->max_bps);
}

void TrafficProgram::handle_emit(StreamIdx stream) {
    SourceState& st = streams_[stream];
    SimTime now = engine_.now();
    if (now >= st.spec.stop_s) return;
    double rate = current_rate(stream, now);
    if (rate <= 0) {
        if (!st.spec.ramp) return;  // constant zero-rate stream stays silent
        // Idle plateau: wake at the next rate change.
        double step = std::floor((now - st.spec.start_s) / st.spec.ramp->step_duration_s + 1e-9);
        SimTime next = st.spec.start_s + (step + 1) * st.spec.ramp->step_duration_s;
        if (next < st.spec.stop_s) engine_.schedule(next, StreamEmit{stream});
        return;
    }
    std::uint64_t seq = st.next_seq++;
    acct_.on_offered(st.acct_idx, seq);
    Packet pkt;
    pkt.kind = st.spec.kind;
    pkt.stream = st.acct_idx;
    pkt.seq = seq;
    pkt.vni = st.spec.vni;
    pkt.size_bytes = st.spec.pkt_size_bytes;
    inject(stream, std::move(pkt));
    SimTime next = now + st.spec.pkt_size_bytes * 8.0 / rate;
    if (next < st.spec.stop_s) engine_.schedule(next, StreamEmit{stream});
}

}  // namespace evpnsim
