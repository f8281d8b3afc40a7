#ifndef SPINTRACK_REPORT_HPP
#define SPINTRACK_REPORT_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spintrack/flowid.hpp"
#include "spintrack/types.hpp"

namespace spintrack::report {

enum class Kind : std::uint8_t { Event, Snapshot };

enum class Scheme : std::uint8_t { EventBased, Periodic };

struct ExportConfig {
    Scheme scheme = Scheme::EventBased;
    std::uint64_t interval_ns = 5'000'000;  // periodic only
};

// One exported record: either a fresh measurement (event) or a register
// snapshot, which may repeat the previous value.
struct Report {
    Kind kind = Kind::Event;
    std::uint64_t ts_ns = 0;
    flowid::FlowId flow;
    DetectionMode mode;
    Rtt16 rtt_quanta = 0;
    std::optional<std::string> class_name;  // events only
    std::uint64_t ring_sum = 0;
    std::uint32_t ring_fill = 0;
    std::vector<std::uint64_t> counters;
    bool stale = false;

    bool operator==(const Report&) const = default;
};

inline std::string flow_to_string(const flowid::FlowId& id) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%08x", id.value);
    return (id.key_kind == flowid::KeyKind::Cid ? "cid:" : "5t:") + std::string(buf);
}

inline bool flow_from_string(const std::string& s, flowid::FlowId& out) {
    std::size_t colon = s.find(':');
    if (colon == std::string::npos) return false;
    const std::string kind = s.substr(0, colon);
    if (kind == "cid") out.key_kind = flowid::KeyKind::Cid;
    else if (kind == "5t") out.key_kind = flowid::KeyKind::FiveTuple;
    else return false;
    try {
        out.value = static_cast<std::uint32_t>(std::stoul(s.substr(colon + 1), nullptr, 16));
    } catch (...) {
        return false;
    }
    return true;
}

// One JSON object per line, fixed key order, dual time representation
// (raw quanta plus derived milliseconds).
inline std::string serialize_report(const Report& r) {
    nlohmann::ordered_json j;
    j["kind"] = r.kind == Kind::Event ? "event" : "snapshot";
    j["ts_ns"] = r.ts_ns;
    j["flow"] = flow_to_string(r.flow);
    j["mode"] = to_string(r.mode);
    j["rtt_quanta"] = r.rtt_quanta;
    j["rtt_ms"] = quanta_to_ms(r.rtt_quanta);
    if (r.class_name) j["class"] = *r.class_name;
    else j["class"] = nullptr;
    j["ring_sum"] = r.ring_sum;
    j["ring_fill"] = r.ring_fill;
    j["counters"] = r.counters;
    j["stale"] = r.stale;
    return j.dump();
}

struct ParseException : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline Report parse_report(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseException(std::string("bad report line: ") + e.what());
    }
    Report r;
    try {
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "event") r.kind = Kind::Event;
        else if (kind == "snapshot") r.kind = Kind::Snapshot;
        else throw ParseException("unknown report kind: " + kind);
        r.ts_ns = j.at("ts_ns").get<std::uint64_t>();
        if (!flow_from_string(j.at("flow").get<std::string>(), r.flow))
            throw ParseException("bad flow id");
        if (!parse_mode(j.at("mode").get<std::string>(), r.mode))
            throw ParseException("bad detection mode");
        r.rtt_quanta = j.at("rtt_quanta").get<Rtt16>();
        if (!j.at("class").is_null()) r.class_name = j.at("class").get<std::string>();
        r.ring_sum = j.at("ring_sum").get<std::uint64_t>();
        r.ring_fill = j.at("ring_fill").get<std::uint32_t>();
        r.counters = j.at("counters").get<std::vector<std::uint64_t>>();
        r.stale = j.at("stale").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseException(std::string("bad report line: ") + e.what());
    }
    return r;
}

// Flat CSV with counters exploded into c0..cN columns; same field semantics.
inline std::string csv_header(std::size_t counter_count) {
    std::string h = "kind,ts_ns,flow,mode,rtt_quanta,rtt_ms,class,ring_sum,ring_fill";
    for (std::size_t i = 0; i < counter_count; ++i) h += ",c" + std::to_string(i);
    h += ",stale";
    return h;
}

inline std::string serialize_report_csv(const Report& r) {
    std::string s = r.kind == Kind::Event ? "event" : "snapshot";
    s += "," + std::to_string(r.ts_ns);
    s += "," + flow_to_string(r.flow);
    s += "," + to_string(r.mode);
    s += "," + std::to_string(r.rtt_quanta);
    char ms[32];
    std::snprintf(ms, sizeof(ms), "%.6f", quanta_to_ms(r.rtt_quanta));
    s += "," + std::string(ms);
    s += "," + (r.class_name ? *r.class_name : std::string());
    s += "," + std::to_string(r.ring_sum);
    s += "," + std::to_string(r.ring_fill);
    for (auto c : r.counters) s += "," + std::to_string(c);
    s += r.stale ? ",true" : ",false";
    return s;
}

}  // namespace spintrack::report

#endif
