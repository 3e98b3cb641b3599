#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <vector>

#include "flowkit/packet.hpp"

namespace flowkit {

struct RawFrame {
    std::vector<uint8_t> data;
    LinkType link = LinkType::ethernet;
    int64_t timestamp_us = 0;
};

// Streams frames out of a pcap or pcapng file in file order. A corrupt
// trailing record stops the stream and raises the truncated_tail flag;
// an unreadable file or bad container header throws ValidationError.
class CaptureReader {
public:
    virtual ~CaptureReader() = default;

    static std::unique_ptr<CaptureReader> open(const std::filesystem::path& path);
    static bool looks_like_capture(const std::filesystem::path& path);  // by extension

    virtual std::optional<RawFrame> next() = 0;

    uint64_t frames_read() const { return frames_read_; }
    bool truncated_tail() const { return truncated_tail_; }

protected:
    uint64_t frames_read_ = 0;
    bool truncated_tail_ = false;
};

// Packet filter: a packet passes when any rule matches, i.e. either
// endpoint is in the rule's IP set AND the timestamp lies in its window.
// An empty rule list passes everything.
struct FilterRule {
    std::vector<IpAddr> ips;
    int64_t from_us = INT64_MIN;
    int64_t to_us = INT64_MAX;
};

bool passes_filter(const PacketRecord& pkt, const std::vector<FilterRule>& rules);

std::vector<FilterRule> load_filter_rules(const std::filesystem::path& path);

}  // namespace flowkit
