#ifndef SPINTRACK_PIPELINE_HPP
#define SPINTRACK_PIPELINE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "spintrack/flowid.hpp"
#include "spintrack/postproc.hpp"
#include "spintrack/report.hpp"
#include "spintrack/tracker.hpp"
#include "spintrack/types.hpp"
#include "spintrack/wire.hpp"

namespace spintrack {

struct PipelineConfig {
    DetectionMode mode;
    std::uint32_t ring_window = 4;
    postproc::ClassConfig classes = postproc::ClassConfig::defaults();
    flowid::SelectionList selection = flowid::SelectionList::wildcard();
    flowid::CidLenMap cid_map;
    bool cid_flows = false;  // identify flows by CID where a length is known
    report::ExportConfig export_cfg;
    std::size_t table_capacity = 10000;
};

struct PipelineStats {
    std::uint64_t packets_in = 0;
    std::uint64_t packets_tracked = 0;   // short-header packets that updated flow state
    std::uint64_t packets_skipped = 0;   // everything else
    std::uint64_t long_headers_learned = 0;
    std::uint64_t collisions = 0;        // flow slot overwritten by a different id
    std::uint64_t measurements = 0;
};

// Software mirror of the switch pipeline: flow identification, spin phase
// detection, RTT computation, ring buffer + classification, export.
class Pipeline {
public:
    using ReportSink = std::function<void(const report::Report&)>;

    Pipeline(PipelineConfig cfg, ReportSink sink)
        : cfg_(std::move(cfg)), sink_(std::move(sink)), slots_(cfg_.table_capacity) {}

    // Full parse path: UDP payload in, QUIC invariants out.
    void ingest(const wire::RawPacket& pkt) {
        ++stats_.packets_in;
        advance_clock(pkt.capture_ts_ns);

        const auto form = wire::classify_header(pkt.payload);
        if (form == wire::HeaderForm::NotQuic) {
            ++stats_.packets_skipped;
            return;
        }
        if (form == wire::HeaderForm::Long) {
            auto hdr = wire::parse_long_header(pkt.payload);
            // version 0 is version negotiation: no spin bit, nothing to learn
            if (hdr.ok() && hdr->version != 0) {
                cfg_.cid_map.learn(pkt.five_tuple, *hdr);
                ++stats_.long_headers_learned;
            }
            ++stats_.packets_skipped;
            return;
        }

        std::uint8_t dcid_len = 0;
        if (cfg_.cid_flows) {
            if (auto len = cfg_.cid_map.lookup(pkt.five_tuple)) dcid_len = *len;
        }
        auto hdr = wire::parse_short_header(pkt.payload, dcid_len);
        if (!hdr.ok()) {
            ++stats_.packets_skipped;
            return;
        }
        std::optional<ConnectionId> cid;
        if (cfg_.cid_flows && !hdr->dcid.empty()) cid = hdr->dcid;
        track_packet(pkt.capture_ts_ns, flowid::flow_id(pkt.five_tuple, cid), hdr->spin_bit);
    }

    // Frames that did not decode to UDP still count toward the totals.
    void ingest_non_udp(std::uint64_t t_ns) {
        ++stats_.packets_in;
        advance_clock(t_ns);
        ++stats_.packets_skipped;
    }

    // Pre-parsed path used by in-process simulation; five-tuple flow ids.
    void ingest_spin(std::uint64_t t_ns, const FiveTuple& tuple, bool spin) {
        ++stats_.packets_in;
        advance_clock(t_ns);
        track_packet(t_ns, flowid::flow_id(tuple), spin);
    }

    // Emit any snapshots still due at the end of the capture.
    void finish(std::uint64_t end_ns) { advance_clock(end_ns); }

    const PipelineStats& stats() const { return stats_; }

    // Largest per-packet register-group access count seen so far.
    std::uint32_t max_register_accesses() const { return max_rmw_; }

private:
    struct FlowEntry {
        bool occupied = false;
        flowid::FlowId id;
        tracker::FlowState state;
        postproc::RingState ring;
        postproc::ClassCounters counters;
        bool last_stale = false;
    };

    void advance_clock(std::uint64_t t_ns) {
        if (cfg_.export_cfg.scheme != report::Scheme::Periodic) return;
        if (!clock_started_) {
            clock_started_ = true;
            next_snapshot_ns_ = t_ns + cfg_.export_cfg.interval_ns;
            return;
        }
        while (next_snapshot_ns_ <= t_ns) {
            emit_snapshots(next_snapshot_ns_);
            next_snapshot_ns_ += cfg_.export_cfg.interval_ns;
        }
    }

    void emit_snapshots(std::uint64_t at_ns) {
        for (const auto& e : slots_) {
            if (!e.occupied) continue;
            report::Report r;
            r.kind = report::Kind::Snapshot;
            r.ts_ns = at_ns;
            r.flow = e.id;
            r.mode = cfg_.mode;
            r.rtt_quanta = e.state.last_rtt.snapshot();
            r.ring_sum = e.ring.sum();
            r.ring_fill = e.ring.fill();
            r.counters = e.counters.hits;
            r.stale = e.last_stale;
            if (sink_) sink_(r);
        }
    }

    void track_packet(std::uint64_t t_ns, flowid::FlowId id, bool spin) {
        if (!cfg_.selection.admit(id)) {
            ++stats_.packets_skipped;
            return;
        }
        FlowEntry& e = slots_[id.value % slots_.size()];
        if (!e.occupied || !(e.id == id)) {
            if (e.occupied) ++stats_.collisions;
            e.occupied = true;
            e.id = id;
            e.state = tracker::FlowState{};
            e.ring = postproc::RingState(cfg_.ring_window);
            e.counters = postproc::ClassCounters(cfg_.classes.class_count());
            e.last_stale = false;
        }
        ++stats_.packets_tracked;

        tracker::RegisterAccessLog log;
        auto m = tracker::process_packet(e.state, spin, slice_timestamp(t_ns), t_ns, cfg_.mode, &log);
        if (log.max() > max_rmw_) max_rmw_ = log.max();
        if (!m) return;

        ++stats_.measurements;
        e.last_stale = m->stale;
        const std::size_t cls = postproc::classify(m->rtt, e.ring, cfg_.classes, e.counters);
        e.ring.push(m->rtt);

        if (cfg_.export_cfg.scheme == report::Scheme::EventBased && sink_) {
            report::Report r;
            r.kind = report::Kind::Event;
            r.ts_ns = m->t_ns;
            r.flow = e.id;
            r.mode = cfg_.mode;
            r.rtt_quanta = m->rtt;
            r.class_name = cfg_.classes.class_name(cls);
            r.ring_sum = e.ring.sum();
            r.ring_fill = e.ring.fill();
            r.counters = e.counters.hits;
            r.stale = m->stale;
            sink_(r);
        }
    }

    PipelineConfig cfg_;
    ReportSink sink_;
    std::vector<FlowEntry> slots_;
    PipelineStats stats_;
    bool clock_started_ = false;
    std::uint64_t next_snapshot_ns_ = 0;
    std::uint32_t max_rmw_ = 0;
};

}  // namespace spintrack

#endif
