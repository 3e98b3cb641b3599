#include <fstream>

#include "flowkit/errors.hpp"
#include "flowkit/features.hpp"
#include "flowkit/util.hpp"

namespace flowkit {

using nlohmann::json;
using nlohmann::ordered_json;

FlowFeatures extract_features(const FlowRecord& flow, const HistogramEdges& edges) {
    FlowFeatures f;
    f.metadata = compute_metadata(flow, edges);
    f.tls = parse_tls(flow);
    f.dns = parse_dns(flow);
    f.http = parse_http(flow);
    return f;
}

namespace {

void emit_direction(ordered_json& out, const DirectionStats& d, const std::string& prefix) {
    out[prefix + "intervals_ccnt"] = d.intervals_ccnt;
    out[prefix + "ack_psh_rst_syn_fin_cnt"] = d.ack_psh_rst_syn_fin_cnt;
    out[prefix + "hdr_distinct"] = d.hdr_distinct;
    out[prefix + "hdr_ccnt"] = d.hdr_ccnt;
    out[prefix + "pld_distinct"] = d.pld_distinct;
    out[prefix + "pld_ccnt"] = d.pld_ccnt;
    out[prefix + "hdr_mean"] = d.hdr_mean;
    out[prefix + "hdr_bin_40"] = d.hdr_bin_40;
    out[prefix + "pld_bin_128"] = d.pld_bin_128;
    out[prefix + "pld_bin_inf"] = d.pld_bin_inf;
    out[prefix + "pld_max"] = d.pld_max;
    out[prefix + "pld_mean"] = d.pld_mean;
    out[prefix + "pld_medium"] = d.pld_median;
    out[prefix + "pld_var"] = d.pld_var;
}

}  // namespace

ordered_json feature_json(const FlowFeatures& features, TimeMode mode, std::optional<int64_t> id) {
    const MetadataFeatures& m = features.metadata;
    ordered_json out;
    if (id) out["id"] = *id;
    out["sa"] = m.sa;
    out["da"] = m.da;
    out["pr"] = m.pr;
    out["src_port"] = m.src_port;
    out["dst_port"] = m.dst_port;
    out["bytes_out"] = m.bytes_out;
    out["num_pkts_out"] = m.num_pkts_out;
    out["bytes_in"] = m.bytes_in;
    out["num_pkts_in"] = m.num_pkts_in;
    if (mode == TimeMode::raw) {
        out["time_start"] = static_cast<double>(m.time_start_us) / 1e6;
        out["time_end"] = static_cast<double>(m.time_end_us) / 1e6;
    } else {
        out["time_length"] = m.time_length;
    }
    emit_direction(out, m.fwd, "");
    emit_direction(out, m.rev, "rev_");

    if (features.tls) {
        const TlsFeatures& t = *features.tls;
        out["tls_cnt"] = t.tls_cnt;
        out["tls_len"] = t.tls_len;
        out["tls_cs_cnt"] = t.tls_cs_cnt;
        out["tls_cs"] = t.tls_cs;
        out["tls_ext_cnt"] = t.tls_ext_cnt;
        out["tls_ext_types"] = t.tls_ext_types;
        out["tls_key_exchange_len"] = t.tls_key_exchange_len;
        out["tls_svr_cnt"] = t.tls_svr_cnt;
        out["tls_svr_len"] = t.tls_svr_len;
        out["tls_svr_cs_cnt"] = t.tls_svr_cs_cnt;
        out["tls_svr_cs"] = t.tls_svr_cs;
        out["tls_svr_ext_cnt"] = t.tls_svr_ext_cnt;
        out["tls_svr_ext_types"] = t.tls_svr_ext_types;
        out["tls_svr_key_exchange_len"] = t.tls_svr_key_exchange_len;
    }
    if (features.dns) {
        const DnsFeatures& d = *features.dns;
        out["dns_query_cnt"] = d.dns_query_cnt;
        out["dns_query_name_len"] = d.dns_query_name_len;
        out["dns_query_name"] = d.dns_query_name;
        out["dns_query_type"] = d.dns_query_type;
        out["dns_query_class"] = d.dns_query_class;
        out["dns_answer_cnt"] = d.dns_answer_cnt;
        out["dns_answer_ttl"] = d.dns_answer_ttl;
        out["dns_answer_ip"] = d.dns_answer_ip;
    }
    if (features.http) {
        const HttpFeatures& h = *features.http;
        out["http_method"] = h.http_method;
        out["http_uri"] = h.http_uri;
        out["http_host"] = h.http_host;
        out["http_code"] = h.http_code;
        out["http_content_type"] = h.http_content_type;
        out["http_content_len"] = h.http_content_len;
    }
    return out;
}

namespace {

int64_t get_int(const json& obj, const char* key, int64_t fallback = 0) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    if (it->is_number()) return it->get<int64_t>();
    return fallback;
}

double get_double(const json& obj, const char* key, double fallback = 0.0) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number()) return fallback;
    return it->get<double>();
}

std::string get_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) return {};
    return it->get<std::string>();
}

std::vector<int64_t> get_int_array(const json& obj, const char* key) {
    std::vector<int64_t> out;
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_array()) return out;
    for (const auto& v : *it) {
        if (v.is_number()) out.push_back(v.get<int64_t>());
    }
    return out;
}

// Codes appear as "0x1301" strings in our output; tolerate bare numbers.
std::vector<std::string> get_code_array(const json& obj, const char* key) {
    std::vector<std::string> out;
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_array()) return out;
    for (const auto& v : *it) {
        if (v.is_string()) {
            out.push_back(to_lower(v.get<std::string>()));
        } else if (v.is_number_unsigned() || v.is_number_integer()) {
            out.push_back(hex_code(static_cast<uint32_t>(v.get<int64_t>())));
        }
    }
    return out;
}

std::vector<std::string> get_string_array(const json& obj, const char* key) {
    std::vector<std::string> out;
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_array()) return out;
    for (const auto& v : *it) {
        if (v.is_string()) out.push_back(v.get<std::string>());
    }
    return out;
}

DirectionStats parse_direction(const json& obj, const std::string& prefix) {
    DirectionStats d;
    d.intervals_ccnt = get_int_array(obj, (prefix + "intervals_ccnt").c_str());
    auto flags = get_int_array(obj, (prefix + "ack_psh_rst_syn_fin_cnt").c_str());
    for (size_t i = 0; i < std::min<size_t>(5, flags.size()); ++i)
        d.ack_psh_rst_syn_fin_cnt[i] = flags[i];
    d.hdr_distinct = get_int(obj, (prefix + "hdr_distinct").c_str());
    d.hdr_ccnt = get_int_array(obj, (prefix + "hdr_ccnt").c_str());
    d.pld_distinct = get_int(obj, (prefix + "pld_distinct").c_str());
    d.pld_ccnt = get_int_array(obj, (prefix + "pld_ccnt").c_str());
    d.hdr_mean = get_double(obj, (prefix + "hdr_mean").c_str());
    d.hdr_bin_40 = get_int(obj, (prefix + "hdr_bin_40").c_str());
    d.pld_bin_128 = get_int(obj, (prefix + "pld_bin_128").c_str());
    d.pld_bin_inf = get_int(obj, (prefix + "pld_bin_inf").c_str());
    d.pld_max = get_int(obj, (prefix + "pld_max").c_str());
    // Both the Table-1 spelling and the published files' spelling load.
    if (obj.contains(prefix + "pld_medium")) {
        d.pld_median = get_int(obj, (prefix + "pld_medium").c_str());
    } else {
        d.pld_median = get_int(obj, (prefix + "pld_median").c_str());
    }
    d.pld_mean = get_double(obj, (prefix + "pld_mean").c_str());
    d.pld_var = get_double(obj, (prefix + "pld_var").c_str());
    return d;
}

bool has_prefixed_key(const json& obj, const char* prefix) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (it.key().rfind(prefix, 0) == 0) return true;
    }
    return false;
}

}  // namespace

ParsedFlow parse_flow_json(const json& line) {
    if (!line.is_object()) throw ValidationError("feature line is not a JSON object");
    ParsedFlow flow;
    flow.id = get_int(line, "id", -1);

    MetadataFeatures& m = flow.features.metadata;
    m.sa = get_string(line, "sa");
    m.da = get_string(line, "da");
    m.pr = static_cast<int>(get_int(line, "pr"));
    m.src_port = static_cast<int>(get_int(line, "src_port"));
    m.dst_port = static_cast<int>(get_int(line, "dst_port"));
    m.bytes_out = get_int(line, "bytes_out");
    m.bytes_in = get_int(line, "bytes_in");
    m.num_pkts_out = get_int(line, "num_pkts_out");
    m.num_pkts_in = get_int(line, "num_pkts_in");
    if (line.contains("time_length")) {
        m.time_length = get_double(line, "time_length");
    } else {
        double start = get_double(line, "time_start");
        double end = get_double(line, "time_end");
        m.time_start_us = static_cast<int64_t>(start * 1e6 + 0.5);
        m.time_end_us = static_cast<int64_t>(end * 1e6 + 0.5);
        m.time_length = end - start;
    }
    m.fwd = parse_direction(line, "");
    m.rev = parse_direction(line, "rev_");

    if (has_prefixed_key(line, "tls_")) {
        TlsFeatures t;
        t.tls_cnt = get_int(line, "tls_cnt");
        t.tls_len = get_int_array(line, "tls_len");
        t.tls_cs_cnt = get_int(line, "tls_cs_cnt");
        t.tls_cs = get_code_array(line, "tls_cs");
        t.tls_ext_cnt = get_int(line, "tls_ext_cnt");
        t.tls_ext_types = get_code_array(line, "tls_ext_types");
        t.tls_key_exchange_len = get_int(line, "tls_key_exchange_len");
        t.tls_svr_cnt = get_int(line, "tls_svr_cnt");
        t.tls_svr_len = get_int_array(line, "tls_svr_len");
        t.tls_svr_cs_cnt = get_int(line, "tls_svr_cs_cnt");
        t.tls_svr_cs = get_code_array(line, "tls_svr_cs");
        t.tls_svr_ext_cnt = get_int(line, "tls_svr_ext_cnt");
        t.tls_svr_ext_types = get_code_array(line, "tls_svr_ext_types");
        t.tls_svr_key_exchange_len = get_int(line, "tls_svr_key_exchange_len");
        flow.features.tls = std::move(t);
    }
    if (has_prefixed_key(line, "dns_")) {
        DnsFeatures d;
        d.dns_query_cnt = get_int(line, "dns_query_cnt");
        d.dns_query_name_len = get_int_array(line, "dns_query_name_len");
        d.dns_query_name = get_string_array(line, "dns_query_name");
        d.dns_query_type = get_int_array(line, "dns_query_type");
        d.dns_query_class = get_int_array(line, "dns_query_class");
        d.dns_answer_cnt = get_int(line, "dns_answer_cnt");
        d.dns_answer_ttl = get_int_array(line, "dns_answer_ttl");
        d.dns_answer_ip = get_string_array(line, "dns_answer_ip");
        flow.features.dns = std::move(d);
    }
    if (has_prefixed_key(line, "http_")) {
        HttpFeatures h;
        h.http_method = get_string(line, "http_method");
        h.http_uri = get_string(line, "http_uri");
        h.http_host = get_string(line, "http_host");
        h.http_code = get_int(line, "http_code");
        h.http_content_type = get_string(line, "http_content_type");
        h.http_content_len = get_int(line, "http_content_len", -1);
        flow.features.http = std::move(h);
    }
    return flow;
}

std::vector<ParsedFlow> read_features_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open features file: " + path.string());
    std::vector<ParsedFlow> flows;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json parsed;
        try {
            parsed = json::parse(line);
        } catch (const json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": bad JSON: " + e.what());
        }
        flows.push_back(parse_flow_json(parsed));
    }
    return flows;
}

}  // namespace flowkit
