#ifndef SPINTRACK_POSTPROC_HPP
#define SPINTRACK_POSTPROC_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spintrack/types.hpp"

namespace spintrack::postproc {

// Fixed-size ring of recent RTTs with a running sum, so a mean can be read
// off without per-sample divisions on the ingest path.
class RingState {
public:
    explicit RingState(std::uint32_t window = 4) : entries_(window, 0) {}

    std::optional<Rtt16> push(Rtt16 rtt) {
        std::optional<Rtt16> evicted;
        if (fill_ == entries_.size()) {
            evicted = entries_[index_];
            sum_ -= entries_[index_];
        } else {
            ++fill_;
        }
        entries_[index_] = rtt;
        sum_ += rtt;
        index_ = (index_ + 1) % entries_.size();
        return evicted;
    }

    // Control-plane role: the one place a division happens.
    std::optional<Rtt16> mean() const {
        if (fill_ == 0) return std::nullopt;
        return static_cast<Rtt16>(sum_ / fill_);
    }

    std::uint64_t sum() const { return sum_; }
    std::uint32_t fill() const { return static_cast<std::uint32_t>(fill_); }
    std::uint32_t window() const { return static_cast<std::uint32_t>(entries_.size()); }
    bool full() const { return fill_ == entries_.size(); }
    const std::vector<Rtt16>& entries() const { return entries_; }

private:
    std::vector<Rtt16> entries_;
    std::uint64_t sum_ = 0;
    std::size_t index_ = 0;
    std::size_t fill_ = 0;
};

// One classification rule: an optional range match on the current RTT and an
// optional range match of W*rtt against the ring sum, in percent of the mean.
struct ClassRule {
    std::string name;
    std::optional<Rtt16> rtt_min;
    std::optional<Rtt16> rtt_max;
    std::optional<std::uint32_t> ratio_min_pct;
    std::optional<std::uint32_t> ratio_max_pct;

    bool has_ratio() const { return ratio_min_pct || ratio_max_pct; }
    bool is_catch_all() const { return !rtt_min && !rtt_max && !has_ratio(); }
};

inline constexpr std::size_t kMaxClasses = 8;

class ClassConfig {
public:
    // Three default classes: greased/reordered (< 5 quanta ~ 5.2 ms),
    // stable (within +/-10% of the ring mean), unstable (everything else).
    static ClassConfig defaults() {
        ClassConfig c;
        c.rules_.push_back({"greased", std::nullopt, Rtt16(4), std::nullopt, std::nullopt});
        c.rules_.push_back({"stable", std::nullopt, std::nullopt, 90u, 110u});
        c.rules_.push_back({"unstable", std::nullopt, std::nullopt, std::nullopt, std::nullopt});
        return c;
    }

    const std::vector<ClassRule>& rules() const { return rules_; }
    std::size_t class_count() const { return rules_.size(); }
    std::size_t warmup_bucket() const { return rules_.size(); }

    std::string class_name(std::size_t id) const {
        return id < rules_.size() ? rules_[id].name : std::string("warmup");
    }

    std::optional<std::size_t> class_id(const std::string& name) const {
        for (std::size_t i = 0; i < rules_.size(); ++i)
            if (rules_[i].name == name) return i;
        if (name == "warmup") return warmup_bucket();
        return std::nullopt;
    }

    // Lines: name,rtt_min,rtt_max,ratio_min_pct,ratio_max_pct with `*` wildcards.
    // First match wins; the final rule must be a catch-all.
    bool load_file(const std::string& path, std::string& err) {
        std::ifstream in(path);
        if (!in) {
            err = "cannot open class config: " + path;
            return false;
        }
        std::vector<ClassRule> rules;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ss(line);
            std::string name, f1, f2, f3, f4;
            auto field = [&](std::string& out) { return bool(std::getline(ss, out, ',')); };
            if (!field(name) || !field(f1) || !field(f2) || !field(f3) || !field(f4)) {
                err = "malformed class rule at line " + std::to_string(lineno);
                return false;
            }
            ClassRule r;
            r.name = name;
            std::optional<Rtt16>* rtts[] = {&r.rtt_min, &r.rtt_max};
            const std::string* rttf[] = {&f1, &f2};
            for (int i = 0; i < 2; ++i) {
                if (*rttf[i] == "*") continue;
                try {
                    *rtts[i] = static_cast<Rtt16>(std::stoul(*rttf[i]));
                } catch (...) {
                    err = "bad rtt bound at line " + std::to_string(lineno);
                    return false;
                }
            }
            if (f3 != "*") {
                try {
                    r.ratio_min_pct = static_cast<std::uint32_t>(std::stoul(f3));
                } catch (...) {
                    err = "bad ratio bound at line " + std::to_string(lineno);
                    return false;
                }
            }
            if (f4 != "*") {
                try {
                    r.ratio_max_pct = static_cast<std::uint32_t>(std::stoul(f4));
                } catch (...) {
                    err = "bad ratio bound at line " + std::to_string(lineno);
                    return false;
                }
            }
            rules.push_back(std::move(r));
        }
        if (rules.empty() || rules.size() > kMaxClasses) {
            err = "class config must hold 1.." + std::to_string(kMaxClasses) + " rules";
            return false;
        }
        if (!rules.back().is_catch_all()) {
            err = "last class rule must be a catch-all (*,*,*,*)";
            return false;
        }
        rules_ = std::move(rules);
        return true;
    }

private:
    std::vector<ClassRule> rules_;
};

// Hit counters, one per class plus a trailing warm-up bucket for samples
// classified before the ring filled.
struct ClassCounters {
    std::vector<std::uint64_t> hits;

    explicit ClassCounters(std::size_t classes = 0) : hits(classes + 1, 0) {}
    std::uint64_t total() const {
        std::uint64_t t = 0;
        for (auto h : hits) t += h;
        return t;
    }
};

// First-match classification against the ring *before* the new value is
// pushed. Ratio rules compare W*rtt against the sum of a full ring, so they
// stay division-free; with a partially filled ring only plain RTT-range
// rules apply and everything else lands in the warm-up bucket.
inline std::size_t classify(Rtt16 rtt, const RingState& ring, const ClassConfig& cfg,
                            ClassCounters& counters) {
    const std::uint64_t w_rtt = std::uint64_t(ring.window()) * rtt;
    for (std::size_t i = 0; i < cfg.rules().size(); ++i) {
        const ClassRule& r = cfg.rules()[i];
        if (!ring.full() && (r.has_ratio() || r.is_catch_all())) continue;
        if (r.rtt_min && rtt < *r.rtt_min) continue;
        if (r.rtt_max && rtt > *r.rtt_max) continue;
        if (r.has_ratio()) {
            if (!ring.full()) continue;
            if (r.ratio_min_pct && 100 * w_rtt < *r.ratio_min_pct * ring.sum()) continue;
            if (r.ratio_max_pct && 100 * w_rtt > *r.ratio_max_pct * ring.sum()) continue;
        }
        ++counters.hits[i];
        return i;
    }
    ++counters.hits[cfg.warmup_bucket()];
    return cfg.warmup_bucket();
}

}  // namespace spintrack::postproc

#endif
