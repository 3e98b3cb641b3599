#include "flowkit/capture.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "flowkit/errors.hpp"
#include "flowkit/log.hpp"

namespace flowkit {

namespace {

constexpr size_t kMaxFrameLen = 256 * 1024 * 1024;

LinkType map_linktype(uint32_t lt) {
    switch (lt) {
        case 1: return LinkType::ethernet;
        case 12:
        case 101: return LinkType::raw_ip;
        default: return LinkType::other;
    }
}

class ByteSource {
public:
    explicit ByteSource(const std::filesystem::path& path) : in_(path, std::ios::binary) {
        if (!in_) throw ValidationError("cannot open capture file: " + path.string());
    }
    // Returns false on clean EOF at a boundary; partial reads count as short.
    bool read_exact(void* dst, size_t n, bool* short_read) {
        in_.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
        size_t got = static_cast<size_t>(in_.gcount());
        if (got == n) return true;
        *short_read = got > 0;
        return false;
    }
    bool skip(size_t n) {
        in_.seekg(static_cast<std::streamoff>(n), std::ios::cur);
        return static_cast<bool>(in_);
    }

private:
    std::ifstream in_;
};

uint16_t load16(const uint8_t* p, bool big) {
    return big ? static_cast<uint16_t>(p[0] << 8 | p[1]) : static_cast<uint16_t>(p[1] << 8 | p[0]);
}
uint32_t load32(const uint8_t* p, bool big) {
    if (big) return static_cast<uint32_t>(p[0]) << 24 | static_cast<uint32_t>(p[1]) << 16 |
                    static_cast<uint32_t>(p[2]) << 8 | p[3];
    return static_cast<uint32_t>(p[3]) << 24 | static_cast<uint32_t>(p[2]) << 16 |
           static_cast<uint32_t>(p[1]) << 8 | p[0];
}

class PcapReader : public CaptureReader {
public:
    PcapReader(std::filesystem::path path, const uint8_t magic[4])
        : path_(std::move(path)), src_(path_) {
        static const uint8_t le_us[4] = {0xd4, 0xc3, 0xb2, 0xa1};
        static const uint8_t be_us[4] = {0xa1, 0xb2, 0xc3, 0xd4};
        static const uint8_t le_ns[4] = {0x4d, 0x3c, 0xb2, 0xa1};
        static const uint8_t be_ns[4] = {0xa1, 0xb2, 0x3c, 0x4d};
        if (!std::memcmp(magic, le_us, 4)) {
            big_endian_ = false;
        } else if (!std::memcmp(magic, be_us, 4)) {
            big_endian_ = true;
        } else if (!std::memcmp(magic, le_ns, 4)) {
            big_endian_ = false;
            nanosecond_ = true;
        } else if (!std::memcmp(magic, be_ns, 4)) {
            big_endian_ = true;
            nanosecond_ = true;
        } else {
            throw ValidationError("not a pcap file: " + path_.string());
        }
        uint8_t hdr[24];
        bool short_read = false;
        if (!src_.read_exact(hdr, sizeof(hdr), &short_read))
            throw ValidationError("truncated pcap global header: " + path_.string());
        link_ = map_linktype(load32(hdr + 20, big_endian_));
    }

    std::optional<RawFrame> next() override {
        uint8_t rec[16];
        bool short_read = false;
        if (!src_.read_exact(rec, sizeof(rec), &short_read)) {
            if (short_read) stop_truncated("partial record header");
            return std::nullopt;
        }
        uint32_t ts_sec = load32(rec, big_endian_);
        uint32_t ts_frac = load32(rec + 4, big_endian_);
        uint32_t incl_len = load32(rec + 8, big_endian_);
        if (incl_len > kMaxFrameLen) {
            stop_truncated("implausible record length");
            return std::nullopt;
        }
        RawFrame frame;
        frame.data.resize(incl_len);
        if (incl_len > 0 && !src_.read_exact(frame.data.data(), incl_len, &short_read)) {
            stop_truncated("partial record body");
            return std::nullopt;
        }
        int64_t frac_us = nanosecond_ ? ts_frac / 1000 : ts_frac;
        frame.timestamp_us = static_cast<int64_t>(ts_sec) * 1000000 + frac_us;
        frame.link = link_;
        ++frames_read_;
        return frame;
    }

private:
    void stop_truncated(const char* why) {
        truncated_tail_ = true;
        log_event(LogLevel::warn, "capture_truncated",
                  {{"file", path_.string()}, {"reason", why}, {"frames_read", frames_read_}});
    }

    std::filesystem::path path_;
    ByteSource src_;
    bool big_endian_ = false;
    bool nanosecond_ = false;
    LinkType link_ = LinkType::ethernet;
};

class PcapNgReader : public CaptureReader {
public:
    explicit PcapNgReader(std::filesystem::path path) : path_(std::move(path)), src_(path_) {}

    std::optional<RawFrame> next() override {
        while (true) {
            uint8_t head[8];
            bool short_read = false;
            if (!src_.read_exact(head, sizeof(head), &short_read)) {
                if (short_read) stop_truncated("partial block header");
                return std::nullopt;
            }
            // Block type is endian-free only for the SHB (palindromic 0x0A0D0D0A);
            // everything else uses the current section's byte order.
            bool is_shb = !std::memcmp(head, "\x0a\x0d\x0d\x0a", 4);
            uint32_t block_len = load32(head + 4, big_endian_);
            if (is_shb) {
                // Peek the byte-order magic before trusting block_len.
                uint8_t magic[4];
                if (!src_.read_exact(magic, 4, &short_read)) {
                    stop_truncated("truncated section header");
                    return std::nullopt;
                }
                if (!std::memcmp(magic, "\x1a\x2b\x3c\x4d", 4)) {
                    big_endian_ = true;
                } else if (!std::memcmp(magic, "\x4d\x3c\x2b\x1a", 4)) {
                    big_endian_ = false;
                } else {
                    if (first_block_) throw ValidationError("not a pcapng file: " + path_.string());
                    stop_truncated("bad section byte-order magic");
                    return std::nullopt;
                }
                block_len = load32(head + 4, big_endian_);
                if (!sane_block_len(block_len, 12)) return std::nullopt;
                if (!skip_rest(block_len - 12)) return std::nullopt;
                interfaces_.clear();
                first_block_ = false;
                continue;
            }
            if (first_block_) throw ValidationError("not a pcapng file: " + path_.string());
            uint32_t block_type = load32(head, big_endian_);
            if (!sane_block_len(block_len, 12)) return std::nullopt;
            std::vector<uint8_t> body(block_len - 12);
            if (!body.empty() && !src_.read_exact(body.data(), body.size(), &short_read)) {
                stop_truncated("partial block body");
                return std::nullopt;
            }
            uint8_t trailer[4];
            if (!src_.read_exact(trailer, 4, &short_read)) {
                stop_truncated("missing block trailer");
                return std::nullopt;
            }
            if (load32(trailer, big_endian_) != block_len) {
                stop_truncated("block length mismatch");
                return std::nullopt;
            }

            if (block_type == 1) {  // interface description
                parse_idb(body);
                continue;
            }
            if (block_type == 6 && body.size() >= 20) {  // enhanced packet
                uint32_t if_id = load32(body.data(), big_endian_);
                uint64_t ts = static_cast<uint64_t>(load32(body.data() + 4, big_endian_)) << 32 |
                              load32(body.data() + 8, big_endian_);
                uint32_t cap_len = load32(body.data() + 12, big_endian_);
                if (cap_len > body.size() - 20 || if_id >= interfaces_.size()) continue;
                RawFrame frame;
                frame.data.assign(body.begin() + 20, body.begin() + 20 + cap_len);
                frame.link = interfaces_[if_id].link;
                frame.timestamp_us = interfaces_[if_id].to_us(ts);
                ++frames_read_;
                return frame;
            }
            if (block_type == 3 && body.size() >= 4 && !interfaces_.empty()) {  // simple packet
                uint32_t orig_len = load32(body.data(), big_endian_);
                uint32_t cap_len = std::min<uint32_t>(orig_len, static_cast<uint32_t>(body.size() - 4));
                RawFrame frame;
                frame.data.assign(body.begin() + 4, body.begin() + 4 + cap_len);
                frame.link = interfaces_[0].link;
                frame.timestamp_us = 0;
                ++frames_read_;
                return frame;
            }
            // name resolution, statistics, custom blocks: skipped
        }
    }

private:
    struct Interface {
        LinkType link = LinkType::ethernet;
        bool power_of_two = false;
        uint8_t resol = 6;  // 10^-resol (or 2^-resol) seconds per tick

        int64_t to_us(uint64_t ts) const {
            if (power_of_two) {
                unsigned __int128 wide = static_cast<unsigned __int128>(ts) * 1000000u;
                return static_cast<int64_t>(wide >> resol);
            }
            if (resol == 6) return static_cast<int64_t>(ts);
            if (resol > 6) {
                uint64_t div = 1;
                for (int i = 6; i < resol; ++i) div *= 10;
                return static_cast<int64_t>(ts / div);
            }
            uint64_t mul = 1;
            for (int i = resol; i < 6; ++i) mul *= 10;
            return static_cast<int64_t>(ts * mul);
        }
    };

    void parse_idb(const std::vector<uint8_t>& body) {
        Interface ifc;
        if (body.size() >= 8) {
            ifc.link = map_linktype(load16(body.data(), big_endian_));
            size_t pos = 8;
            while (pos + 4 <= body.size()) {
                uint16_t code = load16(body.data() + pos, big_endian_);
                uint16_t len = load16(body.data() + pos + 2, big_endian_);
                if (code == 0) break;
                if (code == 9 && len >= 1 && pos + 4 < body.size()) {  // if_tsresol
                    uint8_t v = body[pos + 4];
                    ifc.power_of_two = v & 0x80;
                    ifc.resol = v & 0x7f;
                }
                pos += 4 + ((len + 3u) & ~3u);
            }
        }
        interfaces_.push_back(ifc);
    }

    bool sane_block_len(uint32_t block_len, uint32_t minimum) {
        if (block_len < minimum || block_len % 4 != 0 || block_len > kMaxFrameLen) {
            stop_truncated("implausible block length");
            return false;
        }
        return true;
    }

    bool skip_rest(size_t n) {
        if (!src_.skip(n)) {
            stop_truncated("truncated block");
            return false;
        }
        return true;
    }

    void stop_truncated(const char* why) {
        truncated_tail_ = true;
        log_event(LogLevel::warn, "capture_truncated",
                  {{"file", path_.string()}, {"reason", why}, {"frames_read", frames_read_}});
    }

    std::filesystem::path path_;
    ByteSource src_;
    bool big_endian_ = false;
    bool first_block_ = true;
    std::vector<Interface> interfaces_;
};

}  // namespace

std::unique_ptr<CaptureReader> CaptureReader::open(const std::filesystem::path& path) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw ValidationError("cannot open capture file: " + path.string());
    uint8_t magic[4] = {0};
    probe.read(reinterpret_cast<char*>(magic), 4);
    if (probe.gcount() < 4) throw ValidationError("capture file too short: " + path.string());
    probe.close();
    if (!std::memcmp(magic, "\x0a\x0d\x0d\x0a", 4)) return std::make_unique<PcapNgReader>(path);
    return std::make_unique<PcapReader>(path, magic);
}

bool CaptureReader::looks_like_capture(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    return ext == ".pcap" || ext == ".pcapng" || ext == ".cap";
}

bool passes_filter(const PacketRecord& pkt, const std::vector<FilterRule>& rules) {
    if (rules.empty()) return true;
    for (const auto& rule : rules) {
        if (pkt.timestamp_us < rule.from_us || pkt.timestamp_us > rule.to_us) continue;
        for (const auto& ip : rule.ips) {
            if (pkt.src_ip == ip || pkt.dst_ip == ip) return true;
        }
    }
    return false;
}

std::vector<FilterRule> load_filter_rules(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open filter rules file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("bad filter rules JSON in " + path.string() + ": " + e.what());
    }
    if (!doc.is_array()) throw ValidationError("filter rules must be a JSON array");
    std::vector<FilterRule> rules;
    for (const auto& entry : doc) {
        FilterRule rule;
        for (const auto& ip : entry.at("ips")) rule.ips.push_back(IpAddr::parse(ip.get<std::string>()));
        if (entry.contains("from_us")) rule.from_us = entry.at("from_us").get<int64_t>();
        if (entry.contains("to_us")) rule.to_us = entry.at("to_us").get<int64_t>();
        rules.push_back(std::move(rule));
    }
    return rules;
}

}  // namespace flowkit
