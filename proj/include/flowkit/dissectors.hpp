#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flowkit/flow.hpp"

namespace flowkit {

// Strings and arrays are clamped; the truncated flags record that a clamp
// or a malformed tail cut parsing short. They are not serialized.
inline constexpr size_t kMaxStringLen = 4096;

struct TlsFeatures {
    int64_t tls_cnt = 0;                     // TLS records seen, initiator direction
    std::vector<int64_t> tls_len;            // record payload lengths, in order
    int64_t tls_cs_cnt = 0;
    std::vector<std::string> tls_cs;         // offered ciphersuites, client order, "0x1301"
    int64_t tls_ext_cnt = 0;
    std::vector<std::string> tls_ext_types;
    int64_t tls_key_exchange_len = 0;        // ClientKeyExchange body length
    int64_t tls_svr_cnt = 0;
    std::vector<int64_t> tls_svr_len;
    int64_t tls_svr_cs_cnt = 0;
    std::vector<std::string> tls_svr_cs;     // selected ciphersuite
    int64_t tls_svr_ext_cnt = 0;
    std::vector<std::string> tls_svr_ext_types;
    int64_t tls_svr_key_exchange_len = 0;    // ServerKeyExchange body length
    bool truncated = false;
};

struct DnsFeatures {
    int64_t dns_query_cnt = 0;               // question entries across request messages
    std::vector<int64_t> dns_query_name_len;
    std::vector<std::string> dns_query_name; // lowercase, dotted, no trailing dot
    std::vector<int64_t> dns_query_type;
    std::vector<int64_t> dns_query_class;
    int64_t dns_answer_cnt = 0;              // answer records across response messages
    std::vector<int64_t> dns_answer_ttl;
    std::vector<std::string> dns_answer_ip;  // A/AAAA rdata only
    bool truncated = false;
};

struct HttpFeatures {
    std::string http_method;
    std::string http_uri;
    std::string http_host;
    int64_t http_code = 0;                   // 0 when no response was captured
    std::string http_content_type;
    int64_t http_content_len = -1;           // -1 when absent
    bool truncated = false;
};

// Content-based TLS detection; client fields come from the first
// ClientHello in the initiator direction, server fields from the first
// ServerHello. Absent when no stored payload starts a valid TLS record.
std::optional<TlsFeatures> parse_tls(const FlowRecord& flow);

// Requires UDP with port 53 on either side and at least one payload that
// parses as a DNS message.
std::optional<DnsFeatures> parse_dns(const FlowRecord& flow);

// First HTTP/1.x request in the initiator direction plus the first
// response, if any.
std::optional<HttpFeatures> parse_http(const FlowRecord& flow);

// Descending by count; ties break lexicographically ascending.
std::vector<std::pair<std::string, int64_t>> top_common(std::span<const std::string> values,
                                                        size_t k);

}  // namespace flowkit
