#ifndef SPINTRACK_TYPES_HPP
#define SPINTRACK_TYPES_HPP

#include <array>
#include <cstdint>
#include <cstdio>
#include <span>
#include <string>

namespace spintrack {

// Timestamp quantum: bits 20..35 of the 48-bit nanosecond clock.
// One step is 2^20 ns ~ 1.049 ms; the 16-bit slice wraps every ~68.7 s.
inline constexpr std::uint64_t kQuantumNs = 1ull << 20;
inline constexpr std::uint64_t kWrapNs = kQuantumNs << 16;

using Ts16 = std::uint16_t;
using Rtt16 = std::uint16_t;

inline Ts16 slice_timestamp(std::uint64_t t_ns) {
    return static_cast<Ts16>((t_ns >> 20) & 0xFFFF);
}

// Wrapped difference; correct as long as the true gap is below one wrap.
inline Rtt16 rtt_delta(Ts16 now, Ts16 prev) {
    return static_cast<Rtt16>(now - prev);
}

inline double quanta_to_ms(Rtt16 q) {
    // exact integer nanoseconds first, one rounding step at the division
    return static_cast<double>(std::uint64_t{q} * kQuantumNs) / 1e6;
}

struct FiveTuple {
    std::string src_ip;
    std::string dst_ip;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint8_t protocol = 17;

    bool operator==(const FiveTuple&) const = default;

    // Stable textual form used for hashing and map keys.
    std::string canonical() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%u", src_port);
        std::string s = src_ip + ":" + buf + ">";
        std::snprintf(buf, sizeof(buf), "%u", dst_port);
        s += dst_ip + ":" + buf + "/";
        std::snprintf(buf, sizeof(buf), "%u", protocol);
        s += buf;
        return s;
    }

    FiveTuple reversed() const {
        return {dst_ip, src_ip, dst_port, src_port, protocol};
    }
};

struct ConnectionId {
    std::array<std::uint8_t, 20> bytes{};
    std::uint8_t length = 0;

    static constexpr std::uint8_t kMaxLen = 20;

    bool operator==(const ConnectionId& o) const {
        if (length != o.length) return false;
        for (std::uint8_t i = 0; i < length; ++i)
            if (bytes[i] != o.bytes[i]) return false;
        return true;
    }

    std::span<const std::uint8_t> view() const { return {bytes.data(), length}; }
    bool empty() const { return length == 0; }
};

enum class DetectionKind : std::uint8_t { Naive, ProtectV1, ProtectV2 };

struct DetectionMode {
    DetectionKind kind = DetectionKind::Naive;
    std::uint32_t threshold = 3;  // unused by Naive; N >= 1

    bool operator==(const DetectionMode&) const = default;
};

inline std::string to_string(const DetectionMode& m) {
    switch (m.kind) {
    case DetectionKind::Naive: return "naive";
    case DetectionKind::ProtectV1: return "v1-" + std::to_string(m.threshold);
    case DetectionKind::ProtectV2: return "v2-" + std::to_string(m.threshold);
    }
    return "naive";
}

inline bool parse_mode(const std::string& s, DetectionMode& out) {
    if (s == "naive") {
        out = {DetectionKind::Naive, 1};
        return true;
    }
    auto kind = DetectionKind::Naive;
    if (s.rfind("v1", 0) == 0) kind = DetectionKind::ProtectV1;
    else if (s.rfind("v2", 0) == 0) kind = DetectionKind::ProtectV2;
    else return false;
    std::uint32_t n = 3;
    if (s.size() > 2) {
        if (s[2] != '-') return false;
        try {
            n = static_cast<std::uint32_t>(std::stoul(s.substr(3)));
        } catch (...) {
            return false;
        }
    }
    if (n < 1) return false;
    out = {kind, n};
    return true;
}

}  // namespace spintrack

#endif
