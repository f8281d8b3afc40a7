#ifndef SPINTRACK_FLOWID_HPP
#define SPINTRACK_FLOWID_HPP

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "spintrack/types.hpp"
#include "spintrack/wire.hpp"

namespace spintrack::flowid {

// CRC-32 (IEEE), mirroring a hardware hash-index computation.
inline std::uint32_t crc32(std::span<const std::uint8_t> data) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    std::uint32_t crc = 0xFFFFFFFFu;
    for (std::uint8_t b : data) crc = table[(crc ^ b) & 0xFF] ^ (crc >> 8);
    return crc ^ 0xFFFFFFFFu;
}

inline std::uint32_t crc32(const std::string& s) {
    return crc32(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

enum class KeyKind : std::uint8_t { FiveTuple, Cid };

struct FlowId {
    std::uint32_t value = 0;
    KeyKind key_kind = KeyKind::FiveTuple;

    bool operator==(const FlowId&) const = default;
};

// CID (non-zero-length) wins; five-tuple is the fallback key.
inline FlowId flow_id(const FiveTuple& tuple, const std::optional<ConnectionId>& cid = {}) {
    if (cid && !cid->empty()) return {crc32(cid->view()), KeyKind::Cid};
    return {crc32(tuple.canonical()), KeyKind::FiveTuple};
}

enum class CidMapKey : std::uint8_t { FullTuple, DstEndpoint };

// Learned or configured mapping from flow direction to the DCID length that
// short-header packets of that direction carry.
class CidLenMap {
public:
    explicit CidLenMap(CidMapKey key_mode = CidMapKey::FullTuple) : key_mode_(key_mode) {}

    // A long header's SCID becomes the DCID of the reverse direction; later
    // long headers overwrite earlier entries (the server may replace the
    // client-chosen CID during the handshake).
    void learn(const FiveTuple& tuple, const wire::LongHeaderInfo& hdr) {
        entries_[key_of(tuple.reversed())] = hdr.scid.length;
    }

    void set(const FiveTuple& tuple, std::uint8_t dcid_len) {
        entries_[key_of(tuple)] = dcid_len;
    }

    std::optional<std::uint8_t> lookup(const FiveTuple& tuple) const {
        auto it = entries_.find(key_of(tuple));
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const { return entries_.size(); }

    // Lines: src_ip,src_port,dst_ip,dst_port,proto,dcid_len
    bool load_file(const std::string& path, std::string& err) {
        std::ifstream in(path);
        if (!in) {
            err = "cannot open cid map file: " + path;
            return false;
        }
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            FiveTuple t;
            unsigned sp, dp, proto, len;
            std::istringstream ss(line);
            std::string f;
            auto field = [&](std::string& out) { return bool(std::getline(ss, out, ',')); };
            std::string sps, dps, protos, lens;
            if (!field(t.src_ip) || !field(sps) || !field(t.dst_ip) || !field(dps) ||
                !field(protos) || !field(lens)) {
                err = "malformed cid map line " + std::to_string(lineno);
                return false;
            }
            try {
                sp = std::stoul(sps);
                dp = std::stoul(dps);
                proto = std::stoul(protos);
                len = std::stoul(lens);
            } catch (...) {
                err = "malformed cid map line " + std::to_string(lineno);
                return false;
            }
            if (sp > 65535 || dp > 65535 || proto > 255 || len > ConnectionId::kMaxLen) {
                err = "out-of-range value in cid map line " + std::to_string(lineno);
                return false;
            }
            t.src_port = static_cast<std::uint16_t>(sp);
            t.dst_port = static_cast<std::uint16_t>(dp);
            t.protocol = static_cast<std::uint8_t>(proto);
            set(t, static_cast<std::uint8_t>(len));
        }
        return true;
    }

private:
    std::string key_of(const FiveTuple& t) const {
        if (key_mode_ == CidMapKey::DstEndpoint)
            return t.dst_ip + ":" + std::to_string(t.dst_port);
        return t.canonical();
    }

    CidMapKey key_mode_;
    std::unordered_map<std::string, std::uint8_t> entries_;
};

// Flows are tracked only when explicitly selected; `*` selects everything.
class SelectionList {
public:
    static SelectionList wildcard() {
        SelectionList l;
        l.wildcard_ = true;
        return l;
    }

    void add(FlowId id) { selected_.insert(id.value); }
    void add_tuple(const FiveTuple& t) { selected_.insert(flow_id(t).value); }

    bool admit(FlowId id) const { return wildcard_ || selected_.contains(id.value); }
    bool is_wildcard() const { return wildcard_; }

    // One entry per line: `*`, a hex flow id, or a five-tuple
    // src_ip,src_port,dst_ip,dst_port,proto.
    bool load_file(const std::string& path, std::string& err) {
        std::ifstream in(path);
        if (!in) {
            err = "cannot open selection list: " + path;
            return false;
        }
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty() || line[0] == '#') continue;
            if (line == "*") {
                wildcard_ = true;
                continue;
            }
            if (line.find(',') != std::string::npos) {
                std::istringstream ss(line);
                FiveTuple t;
                std::string sps, dps, protos;
                auto field = [&](std::string& out) { return bool(std::getline(ss, out, ',')); };
                if (!field(t.src_ip) || !field(sps) || !field(t.dst_ip) || !field(dps) ||
                    !field(protos)) {
                    err = "malformed selection line " + std::to_string(lineno);
                    return false;
                }
                try {
                    t.src_port = static_cast<std::uint16_t>(std::stoul(sps));
                    t.dst_port = static_cast<std::uint16_t>(std::stoul(dps));
                    t.protocol = static_cast<std::uint8_t>(std::stoul(protos));
                } catch (...) {
                    err = "malformed selection line " + std::to_string(lineno);
                    return false;
                }
                add_tuple(t);
            } else {
                try {
                    selected_.insert(static_cast<std::uint32_t>(std::stoul(line, nullptr, 16)));
                } catch (...) {
                    err = "malformed selection line " + std::to_string(lineno);
                    return false;
                }
            }
        }
        return true;
    }

private:
    bool wildcard_ = false;
    std::unordered_set<std::uint32_t> selected_;
};

}  // namespace spintrack::flowid

#endif
