#ifndef SPINTRACK_RUN_HPP
#define SPINTRACK_RUN_HPP

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spintrack/pcap.hpp"
#include "spintrack/pipeline.hpp"
#include "spintrack/simgen.hpp"

namespace spintrack::run {

struct SimResult {
    std::vector<report::Report> reports;
    simgen::GroundTruth truth;
    PipelineStats stats;
    std::uint32_t max_register_accesses = 0;
};

// Generate a stream, apply the configured pattern, and feed it through the
// pipeline in-process.
inline SimResult simulate(const simgen::SimConfig& sim, const PipelineConfig& pipe_cfg) {
    SimResult res;
    auto [clean, truth] = simgen::gen_clean_flow(sim);
    res.truth = std::move(truth);
    const auto events = simgen::apply_pattern(clean, sim.pattern, sim.seed);

    Pipeline pipe(pipe_cfg, [&](const report::Report& r) { res.reports.push_back(r); });
    std::uint64_t last_t = 0;
    for (const auto& e : events) {
        pipe.ingest_spin(e.t_ns, sim.tuple, e.spin);
        last_t = e.t_ns;
    }
    pipe.finish(last_t);
    res.stats = pipe.stats();
    res.max_register_accesses = pipe.max_register_accesses();
    return res;
}

// Same stream, but serialized to a capture file first.
inline void emit_pcap(const simgen::SimConfig& sim, const std::string& path) {
    auto [clean, truth] = simgen::gen_clean_flow(sim);
    const auto events = simgen::apply_pattern(clean, sim.pattern, sim.seed);
    pcap::Writer w(path);
    for (const auto& e : events) {
        wire::RawPacket pkt;
        pkt.capture_ts_ns = e.t_ns;
        pkt.five_tuple = sim.tuple;
        pkt.payload = simgen::build_short_header(e.spin, sim.dcid);
        w.write(pkt);
    }
}

struct PcapResult {
    std::vector<report::Report> reports;
    PipelineStats stats;
};

inline PcapResult track_pcap(const std::string& path, const PipelineConfig& pipe_cfg) {
    PcapResult res;
    Pipeline pipe(pipe_cfg, [&](const report::Report& r) { res.reports.push_back(r); });
    pcap::Reader reader(path);
    wire::RawPacket pkt;
    bool udp = false;
    std::uint64_t last_t = 0;
    while (reader.next(pkt, udp)) {
        if (udp) {
            pipe.ingest(pkt);
        } else {
            pipe.ingest_non_udp(pkt.capture_ts_ns);
        }
        last_t = pkt.capture_ts_ns;
    }
    pipe.finish(last_t);
    res.stats = pipe.stats();
    return res;
}

inline std::string serialize_truth(const simgen::Flank& f) {
    nlohmann::ordered_json j;
    j["t_ns"] = f.t_ns;
    j["true_rtt_ns"] = f.true_rtt_ns;
    j["true_rtt_quanta"] = f.true_rtt_quanta;
    return j.dump();
}

}  // namespace spintrack::run

#endif
