#ifndef SPINTRACK_PCAP_HPP
#define SPINTRACK_PCAP_HPP

#include <arpa/inet.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "spintrack/types.hpp"
#include "spintrack/wire.hpp"

namespace spintrack::pcap {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kMagicNano = 0xA1B23C4D;
inline constexpr std::uint32_t kMagicMicro = 0xA1B2C3D4;
inline constexpr std::uint32_t kLinkEthernet = 1;

namespace detail {

inline void put_u16be(std::vector<std::uint8_t>& v, std::uint16_t x) {
    v.push_back(std::uint8_t(x >> 8));
    v.push_back(std::uint8_t(x));
}

inline std::uint16_t ipv4_checksum(const std::uint8_t* hdr, std::size_t len) {
    std::uint32_t sum = 0;
    for (std::size_t i = 0; i + 1 < len; i += 2)
        sum += (std::uint32_t(hdr[i]) << 8) | hdr[i + 1];
    while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
    return std::uint16_t(~sum);
}

}  // namespace detail

// Classic pcap writer (nanosecond timestamps, Ethernet framing). Synthesized
// packets are UDP over IPv4.
class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw IoError("cannot open pcap for writing: " + path);
        std::uint32_t hdr[6] = {kMagicNano, 0, 0, 0, 0xFFFF, kLinkEthernet};
        hdr[1] = (2u << 16) | 4u;  // version 2.4
        out_.write(reinterpret_cast<const char*>(hdr), sizeof(hdr));
    }

    void write(const wire::RawPacket& pkt) {
        in_addr src{}, dst{};
        if (inet_pton(AF_INET, pkt.five_tuple.src_ip.c_str(), &src) != 1 ||
            inet_pton(AF_INET, pkt.five_tuple.dst_ip.c_str(), &dst) != 1)
            throw IoError("pcap writer supports IPv4 addresses only");

        std::vector<std::uint8_t> frame;
        frame.reserve(42 + pkt.payload.size());
        // Ethernet: zero MACs, IPv4 ethertype
        frame.insert(frame.end(), 12, 0);
        detail::put_u16be(frame, 0x0800);
        // IPv4 header
        const std::uint16_t ip_len = std::uint16_t(20 + 8 + pkt.payload.size());
        const std::size_t ip_off = frame.size();
        frame.push_back(0x45);
        frame.push_back(0);
        detail::put_u16be(frame, ip_len);
        detail::put_u16be(frame, 0);  // id
        detail::put_u16be(frame, 0);  // flags/frag
        frame.push_back(64);          // ttl
        frame.push_back(pkt.five_tuple.protocol);
        detail::put_u16be(frame, 0);  // checksum placeholder
        const std::uint8_t* s = reinterpret_cast<const std::uint8_t*>(&src);
        const std::uint8_t* d = reinterpret_cast<const std::uint8_t*>(&dst);
        frame.insert(frame.end(), s, s + 4);
        frame.insert(frame.end(), d, d + 4);
        const std::uint16_t csum = detail::ipv4_checksum(frame.data() + ip_off, 20);
        frame[ip_off + 10] = std::uint8_t(csum >> 8);
        frame[ip_off + 11] = std::uint8_t(csum);
        // UDP header, checksum 0 (legal for IPv4)
        detail::put_u16be(frame, pkt.five_tuple.src_port);
        detail::put_u16be(frame, pkt.five_tuple.dst_port);
        detail::put_u16be(frame, std::uint16_t(8 + pkt.payload.size()));
        detail::put_u16be(frame, 0);
        frame.insert(frame.end(), pkt.payload.begin(), pkt.payload.end());

        std::uint32_t rec[4] = {
            std::uint32_t(pkt.capture_ts_ns / 1'000'000'000ull),
            std::uint32_t(pkt.capture_ts_ns % 1'000'000'000ull),
            std::uint32_t(frame.size()),
            std::uint32_t(frame.size()),
        };
        out_.write(reinterpret_cast<const char*>(rec), sizeof(rec));
        out_.write(reinterpret_cast<const char*>(frame.data()),
                   static_cast<std::streamsize>(frame.size()));
        if (!out_) throw IoError("pcap write failed");
    }

private:
    std::ofstream out_;
};

// Reader yielding UDP packets as RawPacket; non-UDP frames are counted and
// skipped. Accepts microsecond and nanosecond capture files.
class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) throw IoError("cannot open pcap: " + path);
        std::uint32_t hdr[6];
        if (!in_.read(reinterpret_cast<char*>(hdr), sizeof(hdr)))
            throw IoError("truncated pcap global header");
        if (hdr[0] == kMagicNano) nano_ = true;
        else if (hdr[0] == kMagicMicro) nano_ = false;
        else throw IoError("unsupported pcap magic (byte-swapped files not handled)");
        if (hdr[5] != kLinkEthernet) throw IoError("unsupported pcap link type");
    }

    // Returns false at end of file; sets `udp` true when `out` was filled.
    bool next(wire::RawPacket& out, bool& udp) {
        std::uint32_t rec[4];
        if (!in_.read(reinterpret_cast<char*>(rec), sizeof(rec))) return false;
        std::vector<std::uint8_t> frame(rec[2]);
        if (!in_.read(reinterpret_cast<char*>(frame.data()),
                      static_cast<std::streamsize>(frame.size())))
            throw IoError("truncated pcap record");
        out.capture_ts_ns =
            std::uint64_t(rec[0]) * 1'000'000'000ull + (nano_ ? rec[1] : std::uint64_t(rec[1]) * 1000ull);
        udp = decode_udp(frame, out);
        return true;
    }

private:
    static bool decode_udp(const std::vector<std::uint8_t>& f, wire::RawPacket& out) {
        if (f.size() < 14) return false;
        const std::uint16_t ethertype = (std::uint16_t(f[12]) << 8) | f[13];
        std::size_t off = 14;
        char buf[INET6_ADDRSTRLEN];
        if (ethertype == 0x0800) {
            if (f.size() < off + 20) return false;
            const std::size_t ihl = (f[off] & 0x0F) * 4u;
            if (f.size() < off + ihl) return false;
            out.five_tuple.protocol = f[off + 9];
            inet_ntop(AF_INET, f.data() + off + 12, buf, sizeof(buf));
            out.five_tuple.src_ip = buf;
            inet_ntop(AF_INET, f.data() + off + 16, buf, sizeof(buf));
            out.five_tuple.dst_ip = buf;
            off += ihl;
        } else if (ethertype == 0x86DD) {
            if (f.size() < off + 40) return false;
            out.five_tuple.protocol = f[off + 6];
            inet_ntop(AF_INET6, f.data() + off + 8, buf, sizeof(buf));
            out.five_tuple.src_ip = buf;
            inet_ntop(AF_INET6, f.data() + off + 24, buf, sizeof(buf));
            out.five_tuple.dst_ip = buf;
            off += 40;
        } else {
            return false;
        }
        if (out.five_tuple.protocol != 17) return false;
        if (f.size() < off + 8) return false;
        out.five_tuple.src_port = std::uint16_t((f[off] << 8) | f[off + 1]);
        out.five_tuple.dst_port = std::uint16_t((f[off + 2] << 8) | f[off + 3]);
        const std::uint16_t udp_len = std::uint16_t((f[off + 4] << 8) | f[off + 5]);
        if (udp_len < 8 || f.size() < off + udp_len) return false;
        out.payload.assign(f.begin() + static_cast<std::ptrdiff_t>(off + 8),
                           f.begin() + static_cast<std::ptrdiff_t>(off + udp_len));
        return true;
    }

    std::ifstream in_;
    bool nano_ = true;
};

}  // namespace spintrack::pcap

#endif
