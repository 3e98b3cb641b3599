#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace flowkit {

// IPv4 or IPv6 address, raw network-order bytes.
struct IpAddr {
    std::array<uint8_t, 16> bytes{};
    uint8_t size = 4;  // 4 or 16

    static IpAddr v4(const uint8_t* p);
    static IpAddr v6(const uint8_t* p);
    static IpAddr parse(const std::string& text);  // throws ValidationError

    std::string to_string() const;

    // v4 sorts before v6; same family compares byte-wise.
    std::strong_ordering operator<=>(const IpAddr& other) const;
    bool operator==(const IpAddr& other) const = default;
};

struct TcpFlags {
    bool ack = false;
    bool psh = false;
    bool rst = false;
    bool syn = false;
    bool fin = false;
};

// One decoded TCP or UDP packet. header_len covers the network header
// (incl. IPv6 extension headers) plus the transport header; payload_len is
// the on-wire transport payload size, which can exceed payload.size() when
// the capture snap length truncated the frame.
struct PacketRecord {
    int64_t timestamp_us = 0;
    IpAddr src_ip;
    IpAddr dst_ip;
    uint8_t protocol = 0;  // 6 or 17
    uint16_t src_port = 0;
    uint16_t dst_port = 0;
    TcpFlags tcp_flags;
    uint32_t header_len = 0;
    uint32_t payload_len = 0;
    std::vector<uint8_t> payload;
};

enum class SkipReason { non_ip, non_tcp_udp, malformed, fragment_non_first };

const char* to_string(SkipReason reason);

enum class LinkType { ethernet, raw_ip, other };

using DecodeResult = std::variant<PacketRecord, SkipReason>;

// Decodes one link-layer frame. Never throws: anything that is not an
// IPv4/IPv6 frame carrying TCP or UDP comes back as a SkipReason.
DecodeResult decode_packet(std::span<const uint8_t> frame, LinkType link, int64_t timestamp_us);

}  // namespace flowkit
