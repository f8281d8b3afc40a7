#include <doctest.h>

#include <cstdio>
#include <string>
#include <vector>

#include "spintrack/pipeline.hpp"
#include "spintrack/run.hpp"

using namespace spintrack;

namespace {
PipelineConfig default_cfg(DetectionKind kind = DetectionKind::Naive, std::uint32_t n = 1) {
    PipelineConfig cfg;
    cfg.mode = {kind, n};
    return cfg;
}

struct TempPath {
    std::string path;
    explicit TempPath(const char* suffix) { path = std::string(std::tmpnam(nullptr)) + suffix; }
    ~TempPath() { std::remove(path.c_str()); }
};
}  // namespace

TEST_CASE("event reports track a clean simulated flow") {
    simgen::SimConfig sim;  // 40 ms / 250 pkt/s / 8 s
    const auto res = run::simulate(sim, default_cfg());
    REQUIRE(!res.reports.empty());
    double sum = 0;
    for (const auto& r : res.reports) {
        CHECK(r.kind == report::Kind::Event);
        sum += r.rtt_quanta;
    }
    const double mean = sum / double(res.reports.size());
    CHECK(mean == doctest::Approx(40.0 / 1.048576).epsilon(0.02));
    // one report per measurement
    CHECK(res.reports.size() == res.stats.measurements);
    // conservation
    CHECK(res.stats.packets_in == res.stats.packets_tracked + res.stats.packets_skipped);
}

TEST_CASE("first post-warm-up event has ring_fill 1 and warm-up class") {
    simgen::SimConfig sim;
    sim.duration_s = 1.0;
    const auto res = run::simulate(sim, default_cfg());
    REQUIRE(!res.reports.empty());
    CHECK(res.reports.front().ring_fill == 1);
    CHECK(res.reports.front().class_name == "warmup");
}

TEST_CASE("pcap round trip equals the in-process path") {
    simgen::SimConfig sim;
    sim.duration_s = 4.0;
    sim.pattern = simgen::Pattern::P2;
    const auto direct = run::simulate(sim, default_cfg(DetectionKind::ProtectV1, 3));

    TempPath pcap(".pcap");
    run::emit_pcap(sim, pcap.path);
    const auto via_pcap = run::track_pcap(pcap.path, default_cfg(DetectionKind::ProtectV1, 3));

    REQUIRE(via_pcap.reports.size() == direct.reports.size());
    for (std::size_t i = 0; i < direct.reports.size(); ++i)
        CHECK(via_pcap.reports[i] == direct.reports[i]);
}

TEST_CASE("periodic snapshots appear once per interval") {
    simgen::SimConfig sim;
    sim.duration_s = 1.0;
    PipelineConfig cfg = default_cfg();
    cfg.export_cfg.scheme = report::Scheme::Periodic;
    cfg.export_cfg.interval_ns = 5'000'000;
    const auto res = run::simulate(sim, cfg);
    // ~200 snapshots for one flow over 1 s at 5 ms
    CHECK(res.reports.size() >= 195);
    CHECK(res.reports.size() <= 201);
    for (const auto& r : res.reports) CHECK(r.kind == report::Kind::Snapshot);
}

TEST_CASE("large snapshot interval misses measurements") {
    simgen::SimConfig sim;  // 40 ms RTT: ~25 measurements/s
    sim.duration_s = 2.0;
    PipelineConfig cfg = default_cfg();
    cfg.export_cfg.scheme = report::Scheme::Periodic;
    cfg.export_cfg.interval_ns = 100'000'000;
    const auto res = run::simulate(sim, cfg);
    CHECK(res.reports.size() < res.stats.measurements);
}

TEST_CASE("non-admitted flows are skipped and counted") {
    simgen::SimConfig sim;
    sim.duration_s = 1.0;
    PipelineConfig cfg = default_cfg();
    cfg.selection = flowid::SelectionList{};  // empty: nothing admitted
    const auto res = run::simulate(sim, cfg);
    CHECK(res.reports.empty());
    CHECK(res.stats.packets_tracked == 0);
    CHECK(res.stats.packets_skipped == res.stats.packets_in);
}

TEST_CASE("non-quic payloads are skipped") {
    PipelineConfig cfg = default_cfg();
    std::uint64_t skipped_before = 0;
    Pipeline pipe(cfg, nullptr);
    wire::RawPacket pkt;
    pkt.capture_ts_ns = 1000;
    pkt.five_tuple = {"10.0.0.1", "10.0.0.2", 443, 5000, 17};
    pkt.payload = {0x21, 0x00};  // fixed bit clear
    pipe.ingest(pkt);
    CHECK(pipe.stats().packets_skipped == skipped_before + 1);
    CHECK(pipe.stats().packets_tracked == 0);
}

TEST_CASE("long headers teach the cid map; cid mode tracks across rebinding") {
    PipelineConfig cfg = default_cfg();
    cfg.cid_flows = true;
    // key learned DCID lengths by destination endpoint so they survive a
    // source-side rebinding
    cfg.cid_map = flowid::CidLenMap(flowid::CidMapKey::DstEndpoint);
    std::vector<report::Report> reports;
    Pipeline pipe(cfg, [&](const report::Report& r) { reports.push_back(r); });

    const FiveTuple client{"10.0.0.2", "10.0.0.1", 50000, 443, 17};
    const FiveTuple server = client.reversed();

    // server's long header announces its SCID; its length keys the
    // client-to-server short headers' DCID
    ConnectionId scid;
    scid.length = 4;
    scid.bytes = {0xAA, 0xBB, 0xCC, 0xDD};
    wire::RawPacket lh;
    lh.capture_ts_ns = 0;
    lh.five_tuple = server;
    lh.payload = {0xC0, 0, 0, 0, 1, 0x00, 0x04, 0xAA, 0xBB, 0xCC, 0xDD};
    pipe.ingest(lh);
    CHECK(pipe.stats().long_headers_learned == 1);

    // short headers from the client, flipping each packet (naive mode)
    auto send = [&](const FiveTuple& t, std::uint64_t ns, bool spin) {
        wire::RawPacket p;
        p.capture_ts_ns = ns;
        p.five_tuple = t;
        p.payload = simgen::build_short_header(spin, scid);
        pipe.ingest(p);
    };
    std::uint64_t t = 10'000'000;
    bool spin = false;
    for (int i = 0; i < 4; ++i, t += 40'000'000, spin = !spin) send(client, t, spin);
    // NAT rebinding: new source endpoint, same CID
    FiveTuple rebound = client;
    rebound.src_port = 61000;
    for (int i = 0; i < 4; ++i, t += 40'000'000, spin = !spin) send(rebound, t, spin);

    REQUIRE(!reports.empty());
    // all reports belong to one cid-keyed flow
    for (const auto& r : reports) {
        CHECK(r.flow.key_kind == flowid::KeyKind::Cid);
        CHECK(r.flow.value == reports.front().flow.value);
    }
    // 8 flips, minus init and warm-up: 6 measurements despite the rebinding
    CHECK(reports.size() == 6);
}

TEST_CASE("hash collisions overwrite the slot and are counted") {
    PipelineConfig cfg = default_cfg();
    cfg.table_capacity = 1;  // force all flows into one slot
    Pipeline pipe(cfg, nullptr);
    const FiveTuple a{"10.0.0.1", "10.0.0.2", 1, 2, 17};
    const FiveTuple b{"10.0.0.3", "10.0.0.4", 3, 4, 17};
    pipe.ingest_spin(1'000'000, a, false);
    pipe.ingest_spin(2'000'000, b, false);
    pipe.ingest_spin(3'000'000, a, true);
    CHECK(pipe.stats().collisions == 2);
}

TEST_CASE("simulate is deterministic end to end") {
    simgen::SimConfig sim;
    sim.pattern = simgen::Pattern::Greased;
    sim.duration_s = 2.0;
    sim.seed = 31337;
    const auto a = run::simulate(sim, default_cfg(DetectionKind::ProtectV2, 3));
    const auto b = run::simulate(sim, default_cfg(DetectionKind::ProtectV2, 3));
    REQUIRE(a.reports.size() == b.reports.size());
    for (std::size_t i = 0; i < a.reports.size(); ++i)
        CHECK(report::serialize_report(a.reports[i]) == report::serialize_report(b.reports[i]));
}

TEST_CASE("register groups see at most one access per packet across a full run") {
    for (auto kind : {DetectionKind::Naive, DetectionKind::ProtectV1, DetectionKind::ProtectV2}) {
        simgen::SimConfig sim;
        sim.pattern = simgen::Pattern::P3;
        sim.duration_s = 2.0;
        const auto res = run::simulate(sim, default_cfg(kind, 3));
        CHECK(res.max_register_accesses <= 1);
    }
}
