#ifndef SPINTRACK_WIRE_HPP
#define SPINTRACK_WIRE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spintrack/types.hpp"

namespace spintrack::wire {

// A packet as seen by the observer: 48-bit capture clock, addressing, UDP payload.
struct RawPacket {
    std::uint64_t capture_ts_ns = 0;
    FiveTuple five_tuple;
    std::vector<std::uint8_t> payload;
};

enum class HeaderForm : std::uint8_t { Long, Short, NotQuic };

enum class ParseError : std::uint8_t { Truncated, OversizeCid };

template <typename T>
struct Parsed {
    std::optional<T> value;
    ParseError error = ParseError::Truncated;

    bool ok() const { return value.has_value(); }
    const T& operator*() const { return *value; }
    const T* operator->() const { return &*value; }
};

struct LongHeaderInfo {
    std::uint32_t version = 0;
    ConnectionId dcid;
    ConnectionId scid;
};

struct ShortHeaderInfo {
    bool spin_bit = false;
    ConnectionId dcid;
};

inline constexpr std::uint8_t kFormBit = 0x80;
inline constexpr std::uint8_t kFixedBit = 0x40;
inline constexpr std::uint8_t kSpinBit = 0x20;

// Dispatch on the first byte only: form bit selects long/short, a clear
// fixed bit means the datagram is not a QUIC packet.
inline HeaderForm classify_header(std::span<const std::uint8_t> payload) {
    if (payload.empty()) return HeaderForm::NotQuic;
    const std::uint8_t b0 = payload[0];
    if ((b0 & kFixedBit) == 0) return HeaderForm::NotQuic;
    return (b0 & kFormBit) ? HeaderForm::Long : HeaderForm::Short;
}

namespace detail {
inline bool read_cid(std::span<const std::uint8_t> payload, std::size_t& off,
                     ConnectionId& out, ParseError& err) {
    if (off >= payload.size()) {
        err = ParseError::Truncated;
        return false;
    }
    const std::uint8_t len = payload[off++];
    if (len > ConnectionId::kMaxLen) {
        err = ParseError::OversizeCid;
        return false;
    }
    if (off + len > payload.size()) {
        err = ParseError::Truncated;
        return false;
    }
    out.length = len;
    for (std::uint8_t i = 0; i < len; ++i) out.bytes[i] = payload[off + i];
    off += len;
    return true;
}
}  // namespace detail

// Long header: flags, 32-bit version, then DCID and SCID each preceded by a
// one-byte length. Token/packet-number fields past the SCID are opaque here.
inline Parsed<LongHeaderInfo> parse_long_header(std::span<const std::uint8_t> payload) {
    Parsed<LongHeaderInfo> r;
    if (payload.size() < 5) {
        r.error = ParseError::Truncated;
        return r;
    }
    LongHeaderInfo info;
    info.version = (std::uint32_t(payload[1]) << 24) | (std::uint32_t(payload[2]) << 16) |
                   (std::uint32_t(payload[3]) << 8) | std::uint32_t(payload[4]);
    std::size_t off = 5;
    if (!detail::read_cid(payload, off, info.dcid, r.error)) return r;
    if (!detail::read_cid(payload, off, info.scid, r.error)) return r;
    r.value = info;
    return r;
}

// Short header: flags byte (spin = 0x20) followed by a DCID whose length the
// caller must supply, since the header itself carries no length field.
inline Parsed<ShortHeaderInfo> parse_short_header(std::span<const std::uint8_t> payload,
                                                  std::uint8_t dcid_len) {
    Parsed<ShortHeaderInfo> r;
    if (payload.size() < std::size_t(1) + dcid_len) {
        r.error = ParseError::Truncated;
        return r;
    }
    ShortHeaderInfo info;
    info.spin_bit = (payload[0] & kSpinBit) != 0;
    info.dcid.length = dcid_len;
    for (std::uint8_t i = 0; i < dcid_len; ++i) info.dcid.bytes[i] = payload[1 + i];
    r.value = info;
    return r;
}

}  // namespace spintrack::wire

#endif
