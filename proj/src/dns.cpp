#include <arpa/inet.h>

#include <algorithm>
#include <cctype>

#include "flowkit/dissectors.hpp"
#include "flowkit/util.hpp"

namespace flowkit {

namespace {

// Reads a possibly-compressed name starting at pos. Advances pos past the
// name's wire bytes at the original location. A pointer loop truncates the
// name; parsing continues after it.
bool read_name(std::span<const uint8_t> msg, size_t& pos, std::string& out, bool* truncated) {
    size_t cursor = pos;
    bool jumped = false;
    int jumps = 0;
    out.clear();
    while (true) {
        if (cursor >= msg.size()) return false;
        uint8_t len = msg[cursor];
        if (len == 0) {
            if (!jumped) pos = cursor + 1;
            break;
        }
        if ((len & 0xc0) == 0xc0) {
            if (cursor + 1 >= msg.size()) return false;
            if (++jumps > 64) {  // compression loop
                *truncated = true;
                if (!jumped) pos = cursor + 2;
                break;
            }
            size_t target = (static_cast<size_t>(len & 0x3f) << 8) | msg[cursor + 1];
            if (!jumped) pos = cursor + 2;
            jumped = true;
            cursor = target;
            continue;
        }
        if ((len & 0xc0) != 0) return false;  // reserved label types
        if (cursor + 1 + len > msg.size()) return false;
        if (out.size() + 1 + len <= kMaxStringLen) {
            if (!out.empty()) out.push_back('.');
            for (size_t i = 0; i < len; ++i)
                out.push_back(static_cast<char>(std::tolower(msg[cursor + 1 + i])));
        } else {
            *truncated = true;  // keep walking to advance pos, stop recording
        }
        cursor += 1 + len;
    }
    return true;
}

std::string rdata_to_ip(std::span<const uint8_t> rdata) {
    char buf[INET6_ADDRSTRLEN] = {0};
    if (rdata.size() == 4) {
        inet_ntop(AF_INET, rdata.data(), buf, sizeof(buf));
        return buf;
    }
    inet_ntop(AF_INET6, rdata.data(), buf, sizeof(buf));
    return buf;
}

// Applies one datagram to the running feature set. Returns false when the
// payload does not look like DNS at all (header or question section bad).
bool parse_message(std::span<const uint8_t> msg, DnsFeatures& out) {
    if (msg.size() < 12) return false;
    uint16_t flags = static_cast<uint16_t>(msg[2] << 8 | msg[3]);
    bool response = flags & 0x8000;
    uint16_t opcode = (flags >> 11) & 0xf;
    uint16_t qdcount = static_cast<uint16_t>(msg[4] << 8 | msg[5]);
    uint16_t ancount = static_cast<uint16_t>(msg[6] << 8 | msg[7]);
    if (opcode > 2) return false;
    if (qdcount == 0 || qdcount > 16 || ancount > 512) return false;

    struct Question {
        std::string name;
        uint16_t qtype, qclass;
    };
    std::vector<Question> questions;
    size_t pos = 12;
    for (uint16_t q = 0; q < qdcount; ++q) {
        Question question;
        bool trunc = false;
        if (!read_name(msg, pos, question.name, &trunc)) return false;
        if (pos + 4 > msg.size()) return false;
        question.qtype = static_cast<uint16_t>(msg[pos] << 8 | msg[pos + 1]);
        question.qclass = static_cast<uint16_t>(msg[pos + 2] << 8 | msg[pos + 3]);
        pos += 4;
        if (trunc) out.truncated = true;
        questions.push_back(std::move(question));
    }

    if (!response) {
        for (auto& q : questions) {
            out.dns_query_name_len.push_back(static_cast<int64_t>(q.name.size()));
            out.dns_query_name.push_back(std::move(q.name));
            out.dns_query_type.push_back(q.qtype);
            out.dns_query_class.push_back(q.qclass);
            ++out.dns_query_cnt;
        }
        return true;
    }

    // Answer records; a malformed tail stops the walk but keeps the message.
    for (uint16_t a = 0; a < ancount; ++a) {
        std::string name;
        bool trunc = false;
        if (!read_name(msg, pos, name, &trunc)) break;
        if (pos + 10 > msg.size()) break;
        uint16_t rtype = static_cast<uint16_t>(msg[pos] << 8 | msg[pos + 1]);
        uint32_t ttl = static_cast<uint32_t>(msg[pos + 4]) << 24 |
                       static_cast<uint32_t>(msg[pos + 5]) << 16 |
                       static_cast<uint32_t>(msg[pos + 6]) << 8 | msg[pos + 7];
        uint16_t rdlen = static_cast<uint16_t>(msg[pos + 8] << 8 | msg[pos + 9]);
        pos += 10;
        if (pos + rdlen > msg.size()) break;
        out.dns_answer_ttl.push_back(ttl);
        ++out.dns_answer_cnt;
        if ((rtype == 1 && rdlen == 4) || (rtype == 28 && rdlen == 16))
            out.dns_answer_ip.push_back(rdata_to_ip(msg.subspan(pos, rdlen)));
        pos += rdlen;
        if (trunc) out.truncated = true;
    }
    return true;
}

}  // namespace

std::optional<DnsFeatures> parse_dns(const FlowRecord& flow) {
    if (flow.key.protocol != 17) return std::nullopt;
    if (flow.key.port_a != 53 && flow.key.port_b != 53) return std::nullopt;

    DnsFeatures out;
    bool any = false;
    auto scan = [&](const std::vector<PacketRecord>& packets) {
        for (const auto& pkt : packets) {
            if (parse_message(pkt.payload, out)) any = true;
        }
    };
    scan(flow.fwd_packets);
    scan(flow.rev_packets);
    if (!any) return std::nullopt;
    return out;
}

}  // namespace flowkit
