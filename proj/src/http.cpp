#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <string_view>

#include "flowkit/dissectors.hpp"

namespace flowkit {

namespace {

constexpr std::array<std::string_view, 9> kMethods = {
    "GET", "POST", "HEAD", "PUT", "DELETE", "OPTIONS", "TRACE", "CONNECT", "PATCH"};

std::string_view as_text(const std::vector<uint8_t>& payload) {
    return {reinterpret_cast<const char*>(payload.data()), payload.size()};
}

// Returns the line without its terminator and advances pos past it. The
// final unterminated chunk counts as a line (headers may be cut by the
// snap length).
std::string_view next_line(std::string_view text, size_t& pos) {
    size_t eol = text.find('\n', pos);
    std::string_view line;
    if (eol == std::string_view::npos) {
        line = text.substr(pos);
        pos = text.size();
    } else {
        line = text.substr(pos, eol - pos);
        pos = eol + 1;
    }
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::string clamp(std::string_view s, bool* truncated) {
    if (s.size() > kMaxStringLen) {
        *truncated = true;
        s = s.substr(0, kMaxStringLen);
    }
    return std::string(s);
}

// header scan shared by request and response sides
void scan_headers(std::string_view text, size_t pos, HttpFeatures& out, bool want_host) {
    while (pos < text.size()) {
        std::string_view line = next_line(text, pos);
        if (line.empty()) break;  // end of header block
        size_t colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        std::string_view name = trim(line.substr(0, colon));
        std::string_view value = trim(line.substr(colon + 1));
        if (want_host && iequals(name, "Host") && out.http_host.empty()) {
            out.http_host = clamp(value, &out.truncated);
        } else if (!want_host && iequals(name, "Content-Type") && out.http_content_type.empty()) {
            out.http_content_type = clamp(value, &out.truncated);
        } else if (!want_host && iequals(name, "Content-Length") && out.http_content_len < 0) {
            int64_t n = -1;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), n);
            if (ec == std::errc() && ptr == value.data() + value.size() && n >= 0)
                out.http_content_len = n;
        }
    }
}

bool parse_request(std::string_view text, HttpFeatures& out) {
    size_t pos = 0;
    std::string_view line = next_line(text, pos);
    size_t sp1 = line.find(' ');
    if (sp1 == std::string_view::npos) return false;
    std::string_view method = line.substr(0, sp1);
    if (std::find(kMethods.begin(), kMethods.end(), method) == kMethods.end()) return false;
    size_t sp2 = line.rfind(' ');
    if (sp2 == sp1) return false;
    std::string_view version = line.substr(sp2 + 1);
    if (!version.starts_with("HTTP/1.")) return false;
    std::string_view uri = line.substr(sp1 + 1, sp2 - sp1 - 1);
    if (uri.empty()) return false;

    out.http_method = std::string(method);
    out.http_uri = clamp(uri, &out.truncated);
    scan_headers(text, pos, out, /*want_host=*/true);
    return true;
}

bool parse_response(std::string_view text, HttpFeatures& out) {
    size_t pos = 0;
    std::string_view line = next_line(text, pos);
    if (!line.starts_with("HTTP/1.")) return false;
    size_t sp1 = line.find(' ');
    if (sp1 == std::string_view::npos || sp1 + 1 >= line.size()) return false;
    std::string_view rest = line.substr(sp1 + 1);
    size_t sp2 = rest.find(' ');
    std::string_view code_text = sp2 == std::string_view::npos ? rest : rest.substr(0, sp2);
    int code = 0;
    auto [ptr, ec] = std::from_chars(code_text.data(), code_text.data() + code_text.size(), code);
    if (ec != std::errc() || ptr != code_text.data() + code_text.size()) return false;
    if (code < 100 || code > 599) return false;

    out.http_code = code;
    scan_headers(text, pos, out, /*want_host=*/false);
    return true;
}

}  // namespace

std::optional<HttpFeatures> parse_http(const FlowRecord& flow) {
    if (flow.key.protocol != 6) return std::nullopt;

    HttpFeatures out;
    bool found_request = false;
    for (const auto& pkt : flow.fwd_packets) {
        if (pkt.payload.empty()) continue;
        if (parse_request(as_text(pkt.payload), out)) {
            found_request = true;
            break;
        }
    }
    if (!found_request) return std::nullopt;

    for (const auto& pkt : flow.rev_packets) {
        if (pkt.payload.empty()) continue;
        if (parse_response(as_text(pkt.payload), out)) break;
    }
    return out;
}

}  // namespace flowkit
