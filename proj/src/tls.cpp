#include <algorithm>
#include <unordered_map>

#include "flowkit/dissectors.hpp"
#include "flowkit/util.hpp"

namespace flowkit {

namespace {

constexpr size_t kMaxCodes = 4096;  // ciphersuite/extension list clamp

bool valid_record_header(std::span<const uint8_t> p, size_t off) {
    if (off + 5 > p.size()) return false;
    uint8_t type = p[off];
    if (type < 20 || type > 23) return false;
    if (p[off + 1] != 3 || p[off + 2] > 4) return false;
    size_t len = static_cast<size_t>(p[off + 3]) << 8 | p[off + 4];
    return len >= 1 && len <= 16384 + 2048;
}

struct HelloFields {
    std::vector<std::string>* cs;
    int64_t* cs_cnt;
    std::vector<std::string>* ext;
    int64_t* ext_cnt;
};

// body is one complete handshake-message body. Returns false when the
// message is malformed; whatever was appended before that stays.
bool parse_hello(std::span<const uint8_t> body, bool client, HelloFields out, bool* truncated) {
    size_t pos = 0;
    if (pos + 2 + 32 + 1 > body.size()) return false;
    pos += 2 + 32;  // legacy version + random
    size_t sid_len = body[pos];
    pos += 1 + sid_len;
    if (pos > body.size()) return false;

    if (client) {
        if (pos + 2 > body.size()) return false;
        size_t cs_bytes = static_cast<size_t>(body[pos]) << 8 | body[pos + 1];
        pos += 2;
        if (pos + cs_bytes > body.size() || cs_bytes % 2 != 0) return false;
        for (size_t i = 0; i + 1 < cs_bytes && out.cs->size() < kMaxCodes; i += 2) {
            uint16_t code = static_cast<uint16_t>(body[pos + i] << 8 | body[pos + i + 1]);
            out.cs->push_back(hex_code(code));
        }
        if (cs_bytes / 2 > kMaxCodes) *truncated = true;
        *out.cs_cnt = static_cast<int64_t>(out.cs->size());
        pos += cs_bytes;
        if (pos + 1 > body.size()) return false;
        size_t comp_len = body[pos];
        pos += 1 + comp_len;
        if (pos > body.size()) return false;
    } else {
        if (pos + 3 > body.size()) return false;
        uint16_t code = static_cast<uint16_t>(body[pos] << 8 | body[pos + 1]);
        out.cs->push_back(hex_code(code));
        *out.cs_cnt = 1;
        pos += 3;  // ciphersuite + compression method
    }

    // Extensions are optional; their absence is a valid pre-TLS1.0 shape.
    if (pos == body.size()) return true;
    if (pos + 2 > body.size()) return false;
    size_t ext_total = static_cast<size_t>(body[pos]) << 8 | body[pos + 1];
    pos += 2;
    size_t ext_end = std::min(pos + ext_total, body.size());
    while (pos + 4 <= ext_end) {
        uint16_t ext_type = static_cast<uint16_t>(body[pos] << 8 | body[pos + 1]);
        size_t ext_len = static_cast<size_t>(body[pos + 2]) << 8 | body[pos + 3];
        if (pos + 4 + ext_len > ext_end) break;
        if (out.ext->size() < kMaxCodes) out.ext->push_back(hex_code(ext_type));
        pos += 4 + ext_len;
    }
    *out.ext_cnt = static_cast<int64_t>(out.ext->size());
    return true;
}

struct DirState {
    bool hello_seen = false;
    bool kx_seen = false;
};

void scan_direction(const std::vector<PacketRecord>& packets, bool client, TlsFeatures& out,
                    DirState& state) {
    int64_t& cnt = client ? out.tls_cnt : out.tls_svr_cnt;
    auto& lens = client ? out.tls_len : out.tls_svr_len;
    int64_t& kx_len = client ? out.tls_key_exchange_len : out.tls_svr_key_exchange_len;
    uint8_t hello_type = client ? 1 : 2;   // ClientHello / ServerHello
    uint8_t kx_type = client ? 16 : 12;    // ClientKeyExchange / ServerKeyExchange

    HelloFields hello{client ? &out.tls_cs : &out.tls_svr_cs,
                      client ? &out.tls_cs_cnt : &out.tls_svr_cs_cnt,
                      client ? &out.tls_ext_types : &out.tls_svr_ext_types,
                      client ? &out.tls_ext_cnt : &out.tls_svr_ext_cnt};

    for (const auto& pkt : packets) {
        std::span<const uint8_t> p(pkt.payload);
        size_t off = 0;
        while (valid_record_header(p, off)) {
            size_t rec_len = static_cast<size_t>(p[off + 3]) << 8 | p[off + 4];
            ++cnt;
            lens.push_back(static_cast<int64_t>(rec_len));
            if (p[off] == 22) {  // handshake record: walk its messages
                size_t body_end = std::min(off + 5 + rec_len, p.size());
                size_t pos = off + 5;
                while (pos + 4 <= body_end) {
                    uint8_t msg_type = p[pos];
                    size_t msg_len = static_cast<size_t>(p[pos + 1]) << 16 |
                                     static_cast<size_t>(p[pos + 2]) << 8 | p[pos + 3];
                    if (pos + 4 + msg_len > body_end) {
                        out.truncated = true;
                        break;
                    }
                    std::span<const uint8_t> msg = p.subspan(pos + 4, msg_len);
                    if (msg_type == hello_type && !state.hello_seen) {
                        state.hello_seen = true;
                        if (!parse_hello(msg, client, hello, &out.truncated))
                            out.truncated = true;
                    } else if (msg_type == kx_type && !state.kx_seen) {
                        state.kx_seen = true;
                        kx_len = static_cast<int64_t>(msg_len);
                    }
                    pos += 4 + msg_len;
                }
            }
            off += 5 + rec_len;  // continues past captured bytes: loop ends
        }
    }
}

}  // namespace

std::optional<TlsFeatures> parse_tls(const FlowRecord& flow) {
    auto starts_tls = [](const std::vector<PacketRecord>& packets) {
        return std::any_of(packets.begin(), packets.end(), [](const PacketRecord& pkt) {
            return valid_record_header(pkt.payload, 0);
        });
    };
    if (!starts_tls(flow.fwd_packets) && !starts_tls(flow.rev_packets)) return std::nullopt;

    TlsFeatures out;
    DirState client_state, server_state;
    scan_direction(flow.fwd_packets, true, out, client_state);
    scan_direction(flow.rev_packets, false, out, server_state);
    return out;
}

std::vector<std::pair<std::string, int64_t>> top_common(std::span<const std::string> values,
                                                        size_t k) {
    std::unordered_map<std::string, int64_t> counts;
    for (const auto& v : values) ++counts[v];
    std::vector<std::pair<std::string, int64_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
}

}  // namespace flowkit
