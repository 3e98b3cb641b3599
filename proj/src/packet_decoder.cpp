#include "flowkit/packet.hpp"

#include <arpa/inet.h>

#include <cstring>

#include "flowkit/errors.hpp"

namespace flowkit {

IpAddr IpAddr::v4(const uint8_t* p) {
    IpAddr a;
    a.size = 4;
    std::memcpy(a.bytes.data(), p, 4);
    return a;
}

IpAddr IpAddr::v6(const uint8_t* p) {
    IpAddr a;
    a.size = 16;
    std::memcpy(a.bytes.data(), p, 16);
    return a;
}

IpAddr IpAddr::parse(const std::string& text) {
    IpAddr a;
    if (inet_pton(AF_INET, text.c_str(), a.bytes.data()) == 1) {
        a.size = 4;
        return a;
    }
    if (inet_pton(AF_INET6, text.c_str(), a.bytes.data()) == 1) {
        a.size = 16;
        return a;
    }
    throw ValidationError("not an IP address: " + text);
}

std::string IpAddr::to_string() const {
    char buf[INET6_ADDRSTRLEN] = {0};
    inet_ntop(size == 4 ? AF_INET : AF_INET6, bytes.data(), buf, sizeof(buf));
    return buf;
}

std::strong_ordering IpAddr::operator<=>(const IpAddr& other) const {
    if (size != other.size) return size <=> other.size;
    int c = std::memcmp(bytes.data(), other.bytes.data(), size);
    if (c < 0) return std::strong_ordering::less;
    if (c > 0) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

const char* to_string(SkipReason reason) {
    switch (reason) {
        case SkipReason::non_ip: return "non-ip";
        case SkipReason::non_tcp_udp: return "non-tcp-udp";
        case SkipReason::malformed: return "malformed";
        case SkipReason::fragment_non_first: return "fragment-non-first";
    }
    return "?";
}

namespace {

uint16_t rd16(const uint8_t* p) { return static_cast<uint16_t>(p[0] << 8 | p[1]); }

// Parses the transport header at data[off..] and fills the record.
// on_wire is the transport segment size claimed by the network header;
// captured is how much of it is actually present in the frame.
DecodeResult decode_transport(PacketRecord rec, std::span<const uint8_t> data, size_t off,
                              size_t on_wire, size_t captured) {
    const uint8_t* p = data.data() + off;
    if (rec.protocol == 6) {
        if (captured < 20) return SkipReason::malformed;
        size_t doff = static_cast<size_t>(p[12] >> 4) * 4;
        if (doff < 20 || doff > on_wire) return SkipReason::malformed;
        rec.src_port = rd16(p);
        rec.dst_port = rd16(p + 2);
        uint8_t flags = p[13];
        rec.tcp_flags.fin = flags & 0x01;
        rec.tcp_flags.syn = flags & 0x02;
        rec.tcp_flags.rst = flags & 0x04;
        rec.tcp_flags.psh = flags & 0x08;
        rec.tcp_flags.ack = flags & 0x10;
        rec.header_len += static_cast<uint32_t>(doff);
        rec.payload_len = static_cast<uint32_t>(on_wire - doff);
        if (captured > doff) {
            size_t avail = std::min(captured, on_wire) - doff;
            rec.payload.assign(p + doff, p + doff + avail);
        }
        return rec;
    }
    // UDP
    if (captured < 8) return SkipReason::malformed;
    uint16_t udp_len = rd16(p + 4);
    if (udp_len < 8 || udp_len > on_wire) return SkipReason::malformed;
    rec.src_port = rd16(p);
    rec.dst_port = rd16(p + 2);
    rec.header_len += 8;
    rec.payload_len = udp_len - 8u;
    if (captured > 8) {
        size_t avail = std::min({captured, on_wire, static_cast<size_t>(udp_len)}) - 8;
        rec.payload.assign(p + 8, p + 8 + avail);
    }
    return rec;
}

DecodeResult decode_ipv4(std::span<const uint8_t> data, size_t off, PacketRecord rec) {
    if (data.size() < off + 20) return SkipReason::malformed;
    const uint8_t* p = data.data() + off;
    if ((p[0] >> 4) != 4) return SkipReason::malformed;
    size_t ihl = static_cast<size_t>(p[0] & 0x0f) * 4;
    if (ihl < 20 || data.size() < off + ihl) return SkipReason::malformed;
    size_t total_len = rd16(p + 2);
    if (total_len < ihl) return SkipReason::malformed;
    uint16_t frag = rd16(p + 6);
    if ((frag & 0x1fff) != 0) return SkipReason::fragment_non_first;
    uint8_t proto = p[9];
    if (proto != 6 && proto != 17) return SkipReason::non_tcp_udp;

    rec.src_ip = IpAddr::v4(p + 12);
    rec.dst_ip = IpAddr::v4(p + 16);
    rec.protocol = proto;
    rec.header_len = static_cast<uint32_t>(ihl);

    // Ethernet frames may be padded past total_len; snap length may cut
    // them short. Clamp to both before slicing the transport segment.
    size_t captured_ip = std::min(data.size() - off, total_len);
    if (captured_ip < ihl) return SkipReason::malformed;
    return decode_transport(std::move(rec), data, off + ihl, total_len - ihl, captured_ip - ihl);
}

DecodeResult decode_ipv6(std::span<const uint8_t> data, size_t off, PacketRecord rec) {
    if (data.size() < off + 40) return SkipReason::malformed;
    const uint8_t* p = data.data() + off;
    if ((p[0] >> 4) != 6) return SkipReason::malformed;
    size_t payload_len = rd16(p + 4);
    uint8_t next = p[6];
    rec.src_ip = IpAddr::v6(p + 8);
    rec.dst_ip = IpAddr::v6(p + 24);

    size_t captured_payload = std::min(data.size() - off - 40, payload_len);
    size_t cursor = 0;  // offset into the v6 payload
    size_t ext_total = 0;
    for (int hops = 0; hops < 16; ++hops) {
        if (next == 6 || next == 17) {
            rec.protocol = next;
            rec.header_len = static_cast<uint32_t>(40 + ext_total);
            return decode_transport(std::move(rec), data, off + 40 + cursor,
                                    payload_len - cursor, captured_payload - cursor);
        }
        size_t ext_len;
        switch (next) {
            case 0:    // hop-by-hop
            case 43:   // routing
            case 60:   // destination options
            case 135:  // mobility
                if (captured_payload < cursor + 8) return SkipReason::malformed;
                ext_len = (static_cast<size_t>(data[off + 40 + cursor + 1]) + 1) * 8;
                break;
            case 44: {  // fragment: fixed 8 bytes, offset in the high 13 bits
                if (captured_payload < cursor + 8) return SkipReason::malformed;
                uint16_t frag = rd16(data.data() + off + 40 + cursor + 2);
                if ((frag & 0xfff8) != 0) return SkipReason::fragment_non_first;
                ext_len = 8;
                break;
            }
            case 51:  // authentication header, length in 4-byte units
                if (captured_payload < cursor + 8) return SkipReason::malformed;
                ext_len = (static_cast<size_t>(data[off + 40 + cursor + 1]) + 2) * 4;
                break;
            default:
                return SkipReason::non_tcp_udp;
        }
        if (cursor + ext_len > captured_payload) return SkipReason::malformed;
        next = data[off + 40 + cursor];
        cursor += ext_len;
        ext_total += ext_len;
    }
    return SkipReason::malformed;
}

}  // namespace

DecodeResult decode_packet(std::span<const uint8_t> frame, LinkType link, int64_t timestamp_us) {
    PacketRecord rec;
    rec.timestamp_us = timestamp_us;

    size_t ip_off = 0;
    if (link == LinkType::ethernet) {
        if (frame.size() < 14) return SkipReason::malformed;
        uint16_t ethertype = rd16(frame.data() + 12);
        // VLAN-tagged traffic is out of schema.
        if (ethertype == 0x8100 || ethertype == 0x88a8 || ethertype == 0x9100)
            return SkipReason::non_ip;
        if (ethertype == 0x0800) {
            ip_off = 14;
            return decode_ipv4(frame, ip_off, std::move(rec));
        }
        if (ethertype == 0x86dd) {
            ip_off = 14;
            return decode_ipv6(frame, ip_off, std::move(rec));
        }
        return SkipReason::non_ip;
    }
    if (link == LinkType::raw_ip) {
        if (frame.empty()) return SkipReason::malformed;
        uint8_t version = frame[0] >> 4;
        if (version == 4) return decode_ipv4(frame, 0, std::move(rec));
        if (version == 6) return decode_ipv6(frame, 0, std::move(rec));
        return SkipReason::non_ip;
    }
    return SkipReason::non_ip;
}

}  // namespace flowkit
