#pragma once

#include <cstdint>
#include <list>
#include <unordered_map>
#include <vector>

#include "flowkit/packet.hpp"

namespace flowkit {

inline constexpr size_t kPacketCap = 200;  // stored packets per direction
inline constexpr int64_t kDefaultIdleTimeoutUs = 60'000'000;

// Canonical 5-tuple: (ip_a, port_a) <= (ip_b, port_b) so both directions
// of a connection map to the same key.
struct FlowKey {
    IpAddr ip_a;
    IpAddr ip_b;
    uint16_t port_a = 0;
    uint16_t port_b = 0;
    uint8_t protocol = 0;

    static FlowKey from_packet(const PacketRecord& pkt);
    bool operator==(const FlowKey& other) const = default;

    struct Hash {
        size_t operator()(const FlowKey& k) const;
    };
};

enum class Termination { fin, rst, idle_timeout, capture_end, packet_cap };

const char* to_string(Termination t);

struct FlowRecord {
    FlowKey key;
    IpAddr initiator_ip;  // endpoint that sent the first packet ("out" direction)
    uint16_t initiator_port = 0;
    std::vector<PacketRecord> fwd_packets;
    std::vector<PacketRecord> rev_packets;
    uint64_t fwd_overflow = 0;  // packets beyond the cap: counted, not stored
    uint64_t rev_overflow = 0;
    int64_t time_start_us = 0;
    int64_t time_end_us = 0;
    Termination termination = Termination::capture_end;

    bool is_forward(const PacketRecord& pkt) const {
        return pkt.src_ip == initiator_ip && pkt.src_port == initiator_port;
    }
};

// Single-pass flow table over a non-decreasing packet stream. Mild
// reordering is fine: packets join their flow by key and each direction
// is re-sorted by timestamp before the record is emitted.
class FlowAssembler {
public:
    explicit FlowAssembler(int64_t idle_timeout_us = kDefaultIdleTimeoutUs);

    // Feeds one packet; returns flows expired by the advancing clock.
    std::vector<FlowRecord> push(const PacketRecord& pkt);

    // Flushes everything left at capture end, in first-seen order.
    std::vector<FlowRecord> finish();

    uint64_t packets_consumed() const { return packets_consumed_; }

private:
    struct ActiveFlow {
        FlowRecord record;
        int64_t last_activity_us = 0;
        uint64_t sequence = 0;  // first-seen order
        bool fin_fwd = false;
        bool fin_rev = false;
        bool rst = false;
        bool cap_hit = false;
        std::list<FlowKey>::iterator lru_pos;

        bool closed() const { return rst || (fin_fwd && fin_rev); }
    };

    void absorb(ActiveFlow& flow, const PacketRecord& pkt);
    FlowRecord seal(ActiveFlow&& flow, Termination cause);
    std::vector<FlowRecord> expire_idle(int64_t now_us);

    int64_t idle_timeout_us_;
    int64_t clock_us_ = INT64_MIN;
    uint64_t next_sequence_ = 0;
    uint64_t packets_consumed_ = 0;
    std::unordered_map<FlowKey, ActiveFlow, FlowKey::Hash> table_;
    std::list<FlowKey> lru_;  // least recently active at front
};

}  // namespace flowkit
