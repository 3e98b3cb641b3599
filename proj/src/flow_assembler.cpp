#include "flowkit/flow.hpp"

#include <algorithm>

#include "flowkit/util.hpp"

namespace flowkit {

FlowKey FlowKey::from_packet(const PacketRecord& pkt) {
    FlowKey key;
    key.protocol = pkt.protocol;
    bool src_first = std::pair(pkt.src_ip, pkt.src_port) <= std::pair(pkt.dst_ip, pkt.dst_port);
    if (src_first) {
        key.ip_a = pkt.src_ip;
        key.port_a = pkt.src_port;
        key.ip_b = pkt.dst_ip;
        key.port_b = pkt.dst_port;
    } else {
        key.ip_a = pkt.dst_ip;
        key.port_a = pkt.dst_port;
        key.ip_b = pkt.src_ip;
        key.port_b = pkt.src_port;
    }
    return key;
}

size_t FlowKey::Hash::operator()(const FlowKey& k) const {
    uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const uint8_t* p, size_t n) {
        for (size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    mix(k.ip_a.bytes.data(), k.ip_a.size);
    mix(k.ip_b.bytes.data(), k.ip_b.size);
    uint8_t tail[5] = {static_cast<uint8_t>(k.port_a >> 8), static_cast<uint8_t>(k.port_a),
                       static_cast<uint8_t>(k.port_b >> 8), static_cast<uint8_t>(k.port_b),
                       k.protocol};
    mix(tail, sizeof(tail));
    return static_cast<size_t>(h);
}

const char* to_string(Termination t) {
    switch (t) {
        case Termination::fin: return "fin";
        case Termination::rst: return "rst";
        case Termination::idle_timeout: return "idle_timeout";
        case Termination::capture_end: return "capture_end";
        case Termination::packet_cap: return "packet_cap";
    }
    return "?";
}

FlowAssembler::FlowAssembler(int64_t idle_timeout_us) : idle_timeout_us_(idle_timeout_us) {}

void FlowAssembler::absorb(ActiveFlow& flow, const PacketRecord& pkt) {
    bool forward = flow.record.is_forward(pkt);
    auto& stored = forward ? flow.record.fwd_packets : flow.record.rev_packets;
    auto& overflow = forward ? flow.record.fwd_overflow : flow.record.rev_overflow;
    if (stored.size() < kPacketCap) {
        stored.push_back(pkt);
        flow.record.time_end_us = std::max(flow.record.time_end_us, pkt.timestamp_us);
    } else {
        ++overflow;
        flow.cap_hit = true;
    }
    if (pkt.protocol == 6) {
        if (pkt.tcp_flags.fin) (forward ? flow.fin_fwd : flow.fin_rev) = true;
        if (pkt.tcp_flags.rst) flow.rst = true;
    }
    flow.last_activity_us = std::max(flow.last_activity_us, pkt.timestamp_us);
    ++packets_consumed_;
}

FlowRecord FlowAssembler::seal(ActiveFlow&& flow, Termination cause) {
    FlowRecord rec = std::move(flow.record);
    if (flow.rst) {
        rec.termination = Termination::rst;
    } else if (flow.fin_fwd && flow.fin_rev) {
        rec.termination = Termination::fin;
    } else if (flow.cap_hit) {
        rec.termination = Termination::packet_cap;
    } else {
        rec.termination = cause;
    }
    auto by_time = [](const PacketRecord& a, const PacketRecord& b) {
        return a.timestamp_us < b.timestamp_us;
    };
    std::stable_sort(rec.fwd_packets.begin(), rec.fwd_packets.end(), by_time);
    std::stable_sort(rec.rev_packets.begin(), rec.rev_packets.end(), by_time);
    return rec;
}

std::vector<FlowRecord> FlowAssembler::expire_idle(int64_t now_us) {
    std::vector<FlowRecord> out;
    while (!lru_.empty()) {
        auto it = table_.find(lru_.front());
        if (now_us - it->second.last_activity_us < idle_timeout_us_) break;
        lru_.pop_front();
        out.push_back(seal(std::move(it->second), Termination::idle_timeout));
        table_.erase(it);
    }
    return out;
}

std::vector<FlowRecord> FlowAssembler::push(const PacketRecord& pkt) {
    clock_us_ = std::max(clock_us_, pkt.timestamp_us);
    std::vector<FlowRecord> emitted = expire_idle(clock_us_);

    FlowKey key = FlowKey::from_packet(pkt);
    auto it = table_.find(key);
    if (it != table_.end()) {
        // A fresh SYN after FIN/RST is a new connection, hence a new record.
        if (it->second.closed() && pkt.protocol == 6 && pkt.tcp_flags.syn) {
            lru_.erase(it->second.lru_pos);
            emitted.push_back(seal(std::move(it->second), Termination::capture_end));
            table_.erase(it);
            it = table_.end();
        }
    }
    if (it == table_.end()) {
        ActiveFlow flow;
        flow.record.key = key;
        flow.record.initiator_ip = pkt.src_ip;
        flow.record.initiator_port = pkt.src_port;
        flow.record.time_start_us = pkt.timestamp_us;
        flow.record.time_end_us = pkt.timestamp_us;
        flow.last_activity_us = pkt.timestamp_us;
        flow.sequence = next_sequence_++;
        lru_.push_back(key);
        flow.lru_pos = std::prev(lru_.end());
        it = table_.emplace(key, std::move(flow)).first;
        absorb(it->second, pkt);
        // First packet was already counted into time bounds by absorb.
        return emitted;
    }

    absorb(it->second, pkt);
    lru_.splice(lru_.end(), lru_, it->second.lru_pos);  // most recent to back
    return emitted;
}

std::vector<FlowRecord> FlowAssembler::finish() {
    std::vector<ActiveFlow> rest;
    rest.reserve(table_.size());
    for (auto& [key, flow] : table_) rest.push_back(std::move(flow));
    table_.clear();
    lru_.clear();
    std::sort(rest.begin(), rest.end(),
              [](const ActiveFlow& a, const ActiveFlow& b) { return a.sequence < b.sequence; });
    std::vector<FlowRecord> out;
    out.reserve(rest.size());
    for (auto& flow : rest) {
        bool idle = clock_us_ != INT64_MIN &&
                    clock_us_ - flow.last_activity_us >= idle_timeout_us_;
        out.push_back(seal(std::move(flow), idle ? Termination::idle_timeout
                                                 : Termination::capture_end));
    }
    return out;
}

}  // namespace flowkit
