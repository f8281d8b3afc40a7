#ifndef SPINTRACK_SUMMARY_HPP
#define SPINTRACK_SUMMARY_HPP

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "spintrack/report.hpp"
#include "spintrack/types.hpp"

namespace spintrack::summary {

struct FlowStats {
    // event-based
    std::uint64_t event_count = 0;
    std::uint64_t stale_count = 0;
    double mean_ms = 0;
    double min_ms = 0;
    double max_ms = 0;
    std::map<std::string, std::uint64_t> class_histogram;
    std::vector<Rtt16> event_values;

    // periodic
    std::uint64_t snapshot_count = 0;
    double raw_periodic_mean_ms = 0;
    double dedup_periodic_mean_ms = 0;
    std::vector<Rtt16> dedup_values;  // one per register change
    std::uint64_t last_ring_sum = 0;
    std::uint32_t last_ring_fill = 0;
    std::vector<std::uint64_t> last_counters;
};

struct SummaryStats {
    std::map<std::string, FlowStats> flows;
    std::uint64_t total_events = 0;
    std::uint64_t total_snapshots = 0;
};

struct LineError : std::runtime_error {
    int line;
    LineError(int l, const std::string& what) : std::runtime_error(what), line(l) {}
};

// Snapshots are deduplicated on classification-counter change: every
// measurement increments exactly one counter, so a changed total marks a
// genuinely new register value rather than a re-read of the old one.
inline SummaryStats summarize(std::istream& in) {
    SummaryStats out;
    std::string line;
    int lineno = 0;

    struct Acc {
        std::uint64_t ev_sum_q = 0;
        Rtt16 ev_min = 0xFFFF, ev_max = 0;
        std::uint64_t snap_sum_q = 0;
        std::uint64_t dedup_sum_q = 0;
        std::uint64_t prev_counter_total = 0;
        bool have_prev = false;
    };
    std::map<std::string, Acc> accs;

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        report::Report r;
        try {
            r = report::parse_report(line);
        } catch (const report::ParseException& e) {
            throw LineError(lineno, e.what());
        }
        const std::string key = report::flow_to_string(r.flow);
        FlowStats& f = out.flows[key];
        Acc& a = accs[key];
        std::uint64_t counter_total = 0;
        for (auto c : r.counters) counter_total += c;

        if (r.kind == report::Kind::Event) {
            ++out.total_events;
            ++f.event_count;
            if (r.stale) ++f.stale_count;
            a.ev_sum_q += r.rtt_quanta;
            a.ev_min = std::min(a.ev_min, r.rtt_quanta);
            a.ev_max = std::max(a.ev_max, r.rtt_quanta);
            f.event_values.push_back(r.rtt_quanta);
            if (r.class_name) ++f.class_histogram[*r.class_name];
        } else {
            ++out.total_snapshots;
            ++f.snapshot_count;
            a.snap_sum_q += r.rtt_quanta;
            if (a.have_prev && counter_total != a.prev_counter_total) {
                f.dedup_values.push_back(r.rtt_quanta);
                a.dedup_sum_q += r.rtt_quanta;
            }
            a.have_prev = true;
            a.prev_counter_total = counter_total;
        }
        f.last_ring_sum = r.ring_sum;
        f.last_ring_fill = r.ring_fill;
        f.last_counters = r.counters;
    }

    for (auto& [key, f] : out.flows) {
        const Acc& a = accs[key];
        if (f.event_count) {
            f.mean_ms = double(a.ev_sum_q * kQuantumNs) / (double(f.event_count) * 1e6);
            f.min_ms = quanta_to_ms(a.ev_min);
            f.max_ms = quanta_to_ms(a.ev_max);
        }
        if (f.snapshot_count)
            f.raw_periodic_mean_ms = double(a.snap_sum_q * kQuantumNs) / (double(f.snapshot_count) * 1e6);
        if (!f.dedup_values.empty())
            f.dedup_periodic_mean_ms =
                double(a.dedup_sum_q * kQuantumNs) / (double(f.dedup_values.size()) * 1e6);
    }
    return out;
}

inline nlohmann::ordered_json to_json(const SummaryStats& s) {
    nlohmann::ordered_json j;
    j["total_events"] = s.total_events;
    j["total_snapshots"] = s.total_snapshots;
    j["flows"] = nlohmann::ordered_json::object();
    for (const auto& [key, f] : s.flows) {
        nlohmann::ordered_json fj;
        fj["events"] = f.event_count;
        fj["stale"] = f.stale_count;
        fj["mean_ms"] = f.mean_ms;
        fj["min_ms"] = f.min_ms;
        fj["max_ms"] = f.max_ms;
        fj["classes"] = f.class_histogram;
        fj["snapshots"] = f.snapshot_count;
        fj["raw_periodic_mean_ms"] = f.raw_periodic_mean_ms;
        fj["dedup_periodic_mean_ms"] = f.dedup_periodic_mean_ms;
        fj["dedup_count"] = f.dedup_values.size();
        j["flows"][key] = fj;
    }
    return j;
}

inline std::string to_text(const SummaryStats& s) {
    std::string out;
    char buf[256];
    for (const auto& [key, f] : s.flows) {
        out += "flow " + key + "\n";
        if (f.event_count) {
            std::snprintf(buf, sizeof(buf),
                          "  events: %llu  mean %.3f ms  min %.3f ms  max %.3f ms  stale %llu\n",
                          (unsigned long long)f.event_count, f.mean_ms, f.min_ms, f.max_ms,
                          (unsigned long long)f.stale_count);
            out += buf;
            out += "  classes:";
            for (const auto& [name, hits] : f.class_histogram) {
                std::snprintf(buf, sizeof(buf), " %s=%llu", name.c_str(),
                              (unsigned long long)hits);
                out += buf;
            }
            out += "\n";
        }
        if (f.snapshot_count) {
            std::snprintf(buf, sizeof(buf),
                          "  snapshots: %llu  raw mean %.3f ms  dedup mean %.3f ms (%zu values)\n",
                          (unsigned long long)f.snapshot_count, f.raw_periodic_mean_ms,
                          f.dedup_periodic_mean_ms, f.dedup_values.size());
            out += buf;
        }
    }
    std::snprintf(buf, sizeof(buf), "total: %llu events, %llu snapshots, %zu flows\n",
                  (unsigned long long)s.total_events, (unsigned long long)s.total_snapshots,
                  s.flows.size());
    out += buf;
    return out;
}

}  // namespace spintrack::summary

#endif
