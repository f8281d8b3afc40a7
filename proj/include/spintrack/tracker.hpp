#ifndef SPINTRACK_TRACKER_HPP
#define SPINTRACK_TRACKER_HPP

#include <cstdint>
#include <optional>
#include <utility>

#include "spintrack/types.hpp"

namespace spintrack::tracker {

// Per-packet access counts for the three stateful register groups; the
// pipeline model allows each group one read-modify-write per packet.
struct RegisterAccessLog {
    std::uint32_t phase = 0;      // spin value + flank counter
    std::uint32_t timestamp = 0;  // last-flip timestamp
    std::uint32_t rtt = 0;        // last computed RTT

    void reset() { phase = timestamp = rtt = 0; }
    std::uint32_t max() const {
        std::uint32_t m = phase > timestamp ? phase : timestamp;
        return m > rtt ? m : rtt;
    }
};

// Register wrapper that funnels all state access through a single
// read-modify-write entry point, logging each access.
template <typename T>
class Register {
public:
    template <typename Fn>
    decltype(auto) access(std::uint32_t& counter, Fn&& fn) {
        ++counter;
        return std::forward<Fn>(fn)(value_);
    }

    // Out-of-band read for export snapshots; not a pipeline access.
    const T& snapshot() const { return value_; }

private:
    T value_{};
};

struct PhaseRegs {
    std::uint8_t spin_value = 0;
    std::uint32_t flank_count = 0;
    bool initialized = false;
    bool warmed_up = false;  // set by the first detected transition
};

struct TimestampReg {
    Ts16 last_flip = 0;
    std::uint64_t last_flip_full_ns = 0;  // staleness bookkeeping only
};

struct FlowState {
    Register<PhaseRegs> phase;
    Register<TimestampReg> flip_ts;
    Register<Rtt16> last_rtt;
};

struct Measurement {
    Rtt16 rtt = 0;
    Ts16 at = 0;
    std::uint64_t t_ns = 0;
    bool stale = false;  // true gap exceeded one 16-bit wrap
};

// One pipeline traversal in fixed order: phase detection first, then on a
// transition the timestamp register, then the RTT register. Each group is
// read-modified-written at most once per packet.
inline std::optional<Measurement> process_packet(FlowState& state, bool spin, Ts16 ts,
                                                 std::uint64_t t_ns, const DetectionMode& mode,
                                                 RegisterAccessLog* log = nullptr) {
    RegisterAccessLog scratch;
    RegisterAccessLog& l = log ? *log : scratch;

    enum class Action : std::uint8_t { None, Init, Transition };
    struct PhaseOutcome {
        Action action = Action::None;
        bool emit = false;
    };
    const PhaseOutcome out = state.phase.access(l.phase, [&](PhaseRegs& p) {
        PhaseOutcome o;
        if (!p.initialized) {
            p.initialized = true;
            p.spin_value = spin ? 1 : 0;
            o.action = Action::Init;
            return o;
        }
        const bool opposite = (spin ? 1 : 0) != p.spin_value;
        bool fire = false;
        switch (mode.kind) {
        case DetectionKind::Naive:
            fire = opposite;
            break;
        case DetectionKind::ProtectV1:
            // cumulative: packets of the current phase do not reset the count
            if (opposite && ++p.flank_count >= mode.threshold) fire = true;
            break;
        case DetectionKind::ProtectV2:
            // consecutive: any phase-consistent packet resets the count
            if (opposite) {
                if (++p.flank_count >= mode.threshold) fire = true;
            } else {
                p.flank_count = 0;
            }
            break;
        }
        if (fire) {
            p.spin_value = spin ? 1 : 0;
            p.flank_count = 0;
            o.action = Action::Transition;
            o.emit = p.warmed_up;  // the first flank only arms the interval
            p.warmed_up = true;
        }
        return o;
    });

    if (out.action == Action::None) return std::nullopt;

    if (out.action == Action::Init) {
        state.flip_ts.access(l.timestamp, [&](TimestampReg& r) {
            r.last_flip = ts;
            r.last_flip_full_ns = t_ns;
        });
        return std::nullopt;
    }

    Measurement m;
    m.at = ts;
    m.t_ns = t_ns;
    state.flip_ts.access(l.timestamp, [&](TimestampReg& r) {
        m.rtt = rtt_delta(ts, r.last_flip);
        m.stale = t_ns >= r.last_flip_full_ns && (t_ns - r.last_flip_full_ns) >= kWrapNs;
        r.last_flip = ts;
        r.last_flip_full_ns = t_ns;
    });
    if (!out.emit) return std::nullopt;
    state.last_rtt.access(l.rtt, [&](Rtt16& r) { r = m.rtt; });
    return m;
}

}  // namespace spintrack::tracker

#endif
