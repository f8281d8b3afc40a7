#ifndef SPINTRACK_SIMGEN_HPP
#define SPINTRACK_SIMGEN_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spintrack/types.hpp"
#include "spintrack/wire.hpp"

namespace spintrack::simgen {

enum class Pattern : std::uint8_t { None, Greased, P1, P2, P3 };

inline bool parse_pattern(const std::string& s, Pattern& out) {
    if (s == "none") out = Pattern::None;
    else if (s == "greased") out = Pattern::Greased;
    else if (s == "p1") out = Pattern::P1;
    else if (s == "p2") out = Pattern::P2;
    else if (s == "p3") out = Pattern::P3;
    else return false;
    return true;
}

inline std::string to_string(Pattern p) {
    switch (p) {
    case Pattern::None: return "none";
    case Pattern::Greased: return "greased";
    case Pattern::P1: return "p1";
    case Pattern::P2: return "p2";
    case Pattern::P3: return "p3";
    }
    return "none";
}

struct SimConfig {
    // (start_ns, rtt_ns) steps; first entry must start at 0.
    std::vector<std::pair<std::uint64_t, std::uint64_t>> rtt_schedule = {{0, 40'000'000}};
    double pkt_rate = 250.0;  // packets/s in the observed direction
    double duration_s = 8.0;
    std::uint64_t seed = 1;
    Pattern pattern = Pattern::None;
    FiveTuple tuple{"10.0.0.1", "10.0.0.2", 443, 50000, 17};
    ConnectionId dcid;  // synthesized short headers carry this DCID
};

struct InvalidConfig : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// What the observer sees at the client's ingress: one packet of the
// client-to-server direction, spin value already decided.
struct PacketEvent {
    std::uint64_t t_ns = 0;
    bool spin = false;
};

struct Flank {
    std::uint64_t t_ns = 0;          // time of the genuine spin flip
    std::uint64_t true_rtt_ns = 0;   // interval to the previous flip
    Rtt16 true_rtt_quanta = 0;
};

using GroundTruth = std::vector<Flank>;

inline void validate(const SimConfig& cfg) {
    if (cfg.pkt_rate <= 0) throw InvalidConfig("pkt_rate must be > 0");
    if (cfg.duration_s < 0) throw InvalidConfig("duration must be >= 0");
    if (cfg.rtt_schedule.empty()) throw InvalidConfig("rtt schedule is empty");
    std::uint64_t prev = 0;
    bool first = true;
    for (auto [start, rtt] : cfg.rtt_schedule) {
        if (first && start != 0) throw InvalidConfig("rtt schedule must start at t=0");
        if (!first && start <= prev) throw InvalidConfig("rtt schedule times must increase");
        if (rtt == 0) throw InvalidConfig("rtt values must be > 0");
        prev = start;
        first = false;
    }
}

inline std::uint64_t rtt_at(const SimConfig& cfg, std::uint64_t t_ns) {
    std::uint64_t rtt = cfg.rtt_schedule.front().second;
    for (auto [start, r] : cfg.rtt_schedule) {
        if (start <= t_ns) rtt = r;
        else break;
    }
    return rtt;
}

// The client flips the spin bit once per RTT; seen one-directionally, the
// stream is a square wave whose half-period follows the schedule.
inline std::pair<std::vector<PacketEvent>, GroundTruth> gen_clean_flow(const SimConfig& cfg) {
    validate(cfg);
    std::vector<PacketEvent> events;
    GroundTruth truth;
    const std::uint64_t gap_ns = static_cast<std::uint64_t>(std::llround(1e9 / cfg.pkt_rate));
    const std::uint64_t end_ns = static_cast<std::uint64_t>(std::llround(cfg.duration_s * 1e9));
    bool spin = false;
    std::uint64_t prev_flip = 0;
    std::uint64_t next_flip = rtt_at(cfg, 0);
    for (std::uint64_t t = 0; t < end_ns; t += gap_ns) {
        while (t >= next_flip) {
            spin = !spin;
            const std::uint64_t interval = next_flip - prev_flip;
            truth.push_back({next_flip, interval,
                             static_cast<Rtt16>(std::llround(double(interval) / double(kQuantumNs)))});
            prev_flip = next_flip;
            next_flip += rtt_at(cfg, next_flip);
        }
        events.push_back({t, spin});
    }
    return {std::move(events), std::move(truth)};
}

// Reordering/greasing patterns. Ground truth is untouched: the patterns
// corrupt the observed signal, not the real RTT.
inline std::vector<PacketEvent> apply_pattern(const std::vector<PacketEvent>& stream,
                                              Pattern pattern, std::uint64_t seed) {
    if (stream.empty() || pattern == Pattern::None) return stream;

    if (pattern == Pattern::Greased) {
        std::mt19937_64 rng(seed);
        std::vector<PacketEvent> out = stream;
        for (auto& e : out) e.spin = (rng() & 1) != 0;
        return out;
    }

    // Split into runs of equal spin value, then insert old-flank duplicates
    // at the configured positions, spaced strictly between genuine packets.
    std::vector<std::vector<PacketEvent>> runs;
    runs.push_back({stream.front()});
    for (std::size_t i = 1; i < stream.size(); ++i) {
        if (stream[i].spin != runs.back().back().spin) runs.push_back({});
        runs.back().push_back(stream[i]);
    }

    std::vector<PacketEvent> out;
    out.reserve(stream.size() * 2);
    for (std::size_t ri = 0; ri < runs.size(); ++ri) {
        const auto& run = runs[ri];
        for (std::size_t pi = 0; pi < run.size(); ++pi) {
            out.push_back(run[pi]);
            if (ri == 0) continue;  // no old flank before the first run
            const bool old_spin = !run[pi].spin;
            const std::uint64_t next_t =
                pi + 1 < run.size() ? run[pi + 1].t_ns
                : ri + 1 < runs.size() ? runs[ri + 1].front().t_ns
                                       : run[pi].t_ns + 4'000'000;
            const std::uint64_t gap = next_t - run[pi].t_ns;
            switch (pattern) {
            case Pattern::P1:
                if (pi == 0) out.push_back({run[pi].t_ns + gap / 2, old_spin});
                break;
            case Pattern::P2:
                if (pi < 3) out.push_back({run[pi].t_ns + gap / 2, old_spin});
                break;
            case Pattern::P3:
                if (pi == 2)
                    for (std::uint64_t k = 1; k <= 3; ++k)
                        out.push_back({run[pi].t_ns + gap * k / 4, old_spin});
                break;
            default:
                break;
            }
        }
    }
    return out;
}

// Minimal QUIC short header for a synthesized packet: fixed bit set, spin in
// bit 0x20, the configured DCID, one opaque packet-number byte.
inline std::vector<std::uint8_t> build_short_header(bool spin, const ConnectionId& dcid) {
    std::vector<std::uint8_t> p;
    p.reserve(2 + dcid.length);
    p.push_back(static_cast<std::uint8_t>(wire::kFixedBit | (spin ? wire::kSpinBit : 0)));
    for (std::uint8_t i = 0; i < dcid.length; ++i) p.push_back(dcid.bytes[i]);
    p.push_back(0x00);
    return p;
}

// Scenario files mirror SimConfig: key=value lines.
//   rtt_ms=40           or  schedule=0:40,1000:80   (start ms : rtt ms)
//   rate=250  duration_s=8  seed=1  pattern=none|greased|p1|p2|p3
inline SimConfig parse_scenario(std::istream& in, std::string& err) {
    SimConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            err = "scenario line " + std::to_string(lineno) + ": expected key=value";
            return cfg;
        }
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        try {
            if (key == "rtt_ms") {
                cfg.rtt_schedule = {{0, static_cast<std::uint64_t>(std::llround(std::stod(val) * 1e6))}};
            } else if (key == "schedule") {
                cfg.rtt_schedule.clear();
                std::istringstream ss(val);
                std::string step;
                while (std::getline(ss, step, ',')) {
                    const auto colon = step.find(':');
                    if (colon == std::string::npos) throw std::invalid_argument(step);
                    cfg.rtt_schedule.emplace_back(
                        static_cast<std::uint64_t>(std::llround(std::stod(step.substr(0, colon)) * 1e6)),
                        static_cast<std::uint64_t>(std::llround(std::stod(step.substr(colon + 1)) * 1e6)));
                }
            } else if (key == "rate") {
                cfg.pkt_rate = std::stod(val);
            } else if (key == "duration_s") {
                cfg.duration_s = std::stod(val);
            } else if (key == "seed") {
                cfg.seed = std::stoull(val);
            } else if (key == "pattern") {
                if (!parse_pattern(val, cfg.pattern))
                    throw std::invalid_argument(val);
            } else {
                err = "scenario line " + std::to_string(lineno) + ": unknown key '" + key + "'";
                return cfg;
            }
        } catch (const std::exception&) {
            err = "scenario line " + std::to_string(lineno) + ": bad value for '" + key + "'";
            return cfg;
        }
    }
    err.clear();
    return cfg;
}

inline SimConfig load_scenario(const std::string& path, std::string& err) {
    std::ifstream in(path);
    if (!in) {
        err = "cannot open scenario file: " + path;
        return {};
    }
    return parse_scenario(in, err);
}

}  // namespace spintrack::simgen

#endif
