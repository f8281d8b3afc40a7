// spintrack: passive QUIC spin-bit RTT tracking over capture files, plus a
// deterministic traffic simulator and a report summarizer.

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "spintrack/pipeline.hpp"
#include "spintrack/run.hpp"
#include "spintrack/summary.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitParse = 4;

struct CommonOpts {
    std::string mode = "v1-3";
    std::uint32_t ring = 4;
    std::string classes_file;
    std::string export_scheme = "event";
    double interval_ms = 5.0;
    std::string select = "*";
    std::string cid_map_file;
    bool cid_flows = false;
};

void add_common(CLI::App* app, CommonOpts& o) {
    app->add_option("--mode", o.mode, "detection mode: naive, v1[-N], v2[-N]");
    app->add_option("--ring", o.ring, "ring buffer window (power of two)")->check(CLI::PositiveNumber);
    app->add_option("--classes", o.classes_file, "class config file");
    app->add_option("--export", o.export_scheme, "export scheme: event or periodic");
    app->add_option("--interval-ms", o.interval_ms, "periodic snapshot interval (ms)");
    app->add_option("--select", o.select, "selection list file, or '*' for all flows");
    app->add_option("--cid-map", o.cid_map_file, "static CID-length map file");
    app->add_flag("--cid-flows", o.cid_flows, "identify flows by CID where a length is known");
}

bool is_pow2(std::uint32_t x) { return x && (x & (x - 1)) == 0; }

int build_pipeline_config(const CommonOpts& o, spintrack::PipelineConfig& cfg) {
    using namespace spintrack;
    if (!parse_mode(o.mode, cfg.mode)) {
        std::cerr << "error: bad --mode value '" << o.mode << "'\n";
        return kExitConfig;
    }
    if (!is_pow2(o.ring)) {
        std::cerr << "error: --ring must be a power of two\n";
        return kExitConfig;
    }
    cfg.ring_window = o.ring;
    std::string err;
    if (!o.classes_file.empty() && !cfg.classes.load_file(o.classes_file, err)) {
        std::cerr << "error: " << err << "\n";
        return kExitConfig;
    }
    if (o.export_scheme == "event") {
        cfg.export_cfg.scheme = report::Scheme::EventBased;
    } else if (o.export_scheme == "periodic") {
        cfg.export_cfg.scheme = report::Scheme::Periodic;
        if (o.interval_ms <= 0) {
            std::cerr << "error: --interval-ms must be > 0\n";
            return kExitConfig;
        }
        cfg.export_cfg.interval_ns = static_cast<std::uint64_t>(o.interval_ms * 1e6);
    } else {
        std::cerr << "error: bad --export value '" << o.export_scheme << "'\n";
        return kExitConfig;
    }
    if (o.select != "*") {
        flowid::SelectionList list;
        if (!list.load_file(o.select, err)) {
            std::cerr << "error: " << err << "\n";
            return kExitConfig;
        }
        cfg.selection = list;
    }
    if (!o.cid_map_file.empty() && !cfg.cid_map.load_file(o.cid_map_file, err)) {
        std::cerr << "error: " << err << "\n";
        return kExitConfig;
    }
    cfg.cid_flows = o.cid_flows;
    return kExitOk;
}

int write_reports(const std::vector<spintrack::report::Report>& reports, const std::string& out,
                  bool csv) {
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out.empty() && out != "-") {
        file.open(out);
        if (!file) {
            std::cerr << "error: cannot open output file " << out << "\n";
            return kExitIo;
        }
        os = &file;
    }
    if (csv) {
        if (!reports.empty())
            *os << spintrack::report::csv_header(reports.front().counters.size()) << "\n";
        for (const auto& r : reports) *os << spintrack::report::serialize_report_csv(r) << "\n";
    } else {
        for (const auto& r : reports) *os << spintrack::report::serialize_report(r) << "\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    using namespace spintrack;

    CLI::App app{"passive QUIC spin-bit RTT tracker"};
    app.require_subcommand(1);

    // track
    auto* track = app.add_subcommand("track", "track spin-bit RTTs in a pcap file");
    CommonOpts track_opts;
    std::string track_in, track_out;
    bool track_csv = false;
    track->add_option("--in", track_in, "input pcap file")->required();
    track->add_option("--out", track_out, "report output file (default stdout)");
    track->add_flag("--csv", track_csv, "write CSV instead of JSONL");
    add_common(track, track_opts);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a spin-bit stream and track it");
    CommonOpts sim_opts;
    std::string scenario_file, sim_out, truth_out, pcap_out;
    double rtt_ms = -1, rate = -1, duration = -1;
    std::int64_t seed = -1;
    std::string pattern_str;
    bool sim_csv = false;
    unsigned runs = 1;
    sim->add_option("--scenario", scenario_file, "scenario config file");
    sim->add_option("--rtt-ms", rtt_ms, "constant RTT in ms (overrides scenario)");
    sim->add_option("--rate", rate, "packets per second (overrides scenario)");
    sim->add_option("--duration", duration, "duration in seconds (overrides scenario)");
    sim->add_option("--seed", seed, "PRNG seed (overrides scenario)");
    sim->add_option("--pattern", pattern_str, "none, greased, p1, p2 or p3 (overrides scenario)");
    sim->add_option("--runs", runs, "repeat the scenario this many times, seed incremented");
    sim->add_option("--out", sim_out, "report output file (default stdout)");
    sim->add_option("--truth", truth_out, "ground-truth output file (JSONL)");
    sim->add_option("--pcap", pcap_out, "also write the generated stream as a pcap file");
    sim->add_flag("--csv", sim_csv, "write CSV instead of JSONL");
    add_common(sim, sim_opts);

    // summary
    auto* summ = app.add_subcommand("summary", "summarize a JSONL report file");
    std::string summary_in;
    bool summary_json = false;
    summ->add_option("--in", summary_in, "report file")->required();
    summ->add_flag("--json", summary_json, "machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);  // prints the message / help text
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (*track) {
            PipelineConfig cfg;
            if (int rc = build_pipeline_config(track_opts, cfg)) return rc;
            run::PcapResult res;
            try {
                res = run::track_pcap(track_in, cfg);
            } catch (const pcap::IoError& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitIo;
            }
            if (int rc = write_reports(res.reports, track_out, track_csv)) return rc;
            std::cerr << "packets_in=" << res.stats.packets_in
                      << " tracked=" << res.stats.packets_tracked
                      << " skipped=" << res.stats.packets_skipped
                      << " measurements=" << res.stats.measurements
                      << " collisions=" << res.stats.collisions << "\n";
            return kExitOk;
        }

        if (*sim) {
            PipelineConfig cfg;
            if (int rc = build_pipeline_config(sim_opts, cfg)) return rc;
            simgen::SimConfig scfg;
            if (!scenario_file.empty()) {
                std::string err;
                scfg = simgen::load_scenario(scenario_file, err);
                if (!err.empty()) {
                    std::cerr << "error: " << err << "\n";
                    return kExitConfig;
                }
            }
            if (rtt_ms > 0)
                scfg.rtt_schedule = {{0, static_cast<std::uint64_t>(rtt_ms * 1e6)}};
            if (rate > 0) scfg.pkt_rate = rate;
            if (duration >= 0) scfg.duration_s = duration;
            if (seed >= 0) scfg.seed = static_cast<std::uint64_t>(seed);
            if (!pattern_str.empty() && !simgen::parse_pattern(pattern_str, scfg.pattern)) {
                std::cerr << "error: bad --pattern value '" << pattern_str << "'\n";
                return kExitConfig;
            }

            std::vector<report::Report> reports;
            simgen::GroundTruth truth;
            for (unsigned i = 0; i < runs; ++i) {
                simgen::SimConfig run_cfg = scfg;
                run_cfg.seed += i;
                run::SimResult res;
                try {
                    res = run::simulate(run_cfg, cfg);
                } catch (const simgen::InvalidConfig& e) {
                    std::cerr << "error: " << e.what() << "\n";
                    return kExitConfig;
                }
                reports.insert(reports.end(), res.reports.begin(), res.reports.end());
                if (i == 0) truth = res.truth;
            }
            if (!pcap_out.empty()) {
                try {
                    run::emit_pcap(scfg, pcap_out);
                } catch (const pcap::IoError& e) {
                    std::cerr << "error: " << e.what() << "\n";
                    return kExitIo;
                }
            }
            if (!truth_out.empty()) {
                std::ofstream tf(truth_out);
                if (!tf) {
                    std::cerr << "error: cannot open truth file " << truth_out << "\n";
                    return kExitIo;
                }
                for (const auto& f : truth) tf << run::serialize_truth(f) << "\n";
            }
            return write_reports(reports, sim_out, sim_csv);
        }

        if (*summ) {
            std::ifstream in(summary_in);
            if (!in) {
                std::cerr << "error: cannot open report file " << summary_in << "\n";
                return kExitIo;
            }
            try {
                const auto stats = summary::summarize(in);
                if (summary_json) std::cout << summary::to_json(stats).dump(2) << "\n";
                else std::cout << summary::to_text(stats);
            } catch (const summary::LineError& e) {
                std::cerr << "error: line " << e.line << ": " << e.what() << "\n";
                return kExitParse;
            }
            return kExitOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}
