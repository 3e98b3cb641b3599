#include "flowkit/metadata.hpp"

#include <algorithm>
#include <unordered_set>

namespace flowkit {

namespace {

DirectionStats direction_stats(const std::vector<PacketRecord>& packets,
                               const HistogramEdges& edges) {
    DirectionStats s;

    std::vector<int64_t> timestamps, hdr, pld;
    timestamps.reserve(packets.size());
    hdr.reserve(packets.size());
    pld.reserve(packets.size());
    for (const auto& pkt : packets) {
        timestamps.push_back(pkt.timestamp_us);
        hdr.push_back(pkt.header_len);
        pld.push_back(pkt.payload_len);
        s.ack_psh_rst_syn_fin_cnt[0] += pkt.tcp_flags.ack;
        s.ack_psh_rst_syn_fin_cnt[1] += pkt.tcp_flags.psh;
        s.ack_psh_rst_syn_fin_cnt[2] += pkt.tcp_flags.rst;
        s.ack_psh_rst_syn_fin_cnt[3] += pkt.tcp_flags.syn;
        s.ack_psh_rst_syn_fin_cnt[4] += pkt.tcp_flags.fin;
    }

    // Arrival intervals come from sorted timestamps so the result does not
    // depend on storage order.
    std::sort(timestamps.begin(), timestamps.end());
    std::vector<int64_t> intervals_us;
    if (timestamps.size() > 1) {
        intervals_us.reserve(timestamps.size() - 1);
        for (size_t i = 1; i < timestamps.size(); ++i)
            intervals_us.push_back(timestamps[i] - timestamps[i - 1]);
    }
    std::vector<int64_t> interval_edges_us;
    interval_edges_us.reserve(edges.intervals_ms.size());
    for (int64_t ms : edges.intervals_ms) interval_edges_us.push_back(ms * 1000);
    s.intervals_ccnt = compact_hist(intervals_us, interval_edges_us);

    s.hdr_ccnt = compact_hist(hdr, edges.hdr_bytes);
    s.pld_ccnt = compact_hist(pld, edges.pld_bytes);

    s.hdr_distinct = static_cast<int64_t>(
        std::unordered_set<int64_t>(hdr.begin(), hdr.end()).size());
    s.pld_distinct = static_cast<int64_t>(
        std::unordered_set<int64_t>(pld.begin(), pld.end()).size());

    for (int64_t h : hdr) {
        if (h >= 28 && h <= 40) ++s.hdr_bin_40;
    }
    for (int64_t p : pld) {
        if (p < 128) ++s.pld_bin_128;
        if (p > 1024) ++s.pld_bin_inf;
    }

    if (!hdr.empty()) {
        double sum = 0;
        for (int64_t h : hdr) sum += static_cast<double>(h);
        s.hdr_mean = sum / static_cast<double>(hdr.size());
    }
    if (!pld.empty()) {
        double sum = 0;
        for (int64_t p : pld) sum += static_cast<double>(p);
        s.pld_mean = sum / static_cast<double>(pld.size());
        double sq = 0;
        for (int64_t p : pld) {
            double d = static_cast<double>(p) - s.pld_mean;
            sq += d * d;
        }
        s.pld_var = sq / static_cast<double>(pld.size());

        std::vector<int64_t> sorted_pld = pld;
        std::sort(sorted_pld.begin(), sorted_pld.end());
        s.pld_max = sorted_pld.back();
        s.pld_median = sorted_pld[(sorted_pld.size() - 1) / 2];
    }
    return s;
}

}  // namespace

MetadataFeatures compute_metadata(const FlowRecord& flow, const HistogramEdges& edges) {
    MetadataFeatures m;
    m.sa = flow.initiator_ip.to_string();
    m.pr = flow.key.protocol;
    m.src_port = flow.initiator_port;
    // The responder endpoint is whichever side of the key the initiator is not.
    if (flow.initiator_ip == flow.key.ip_a && flow.initiator_port == flow.key.port_a) {
        m.da = flow.key.ip_b.to_string();
        m.dst_port = flow.key.port_b;
    } else {
        m.da = flow.key.ip_a.to_string();
        m.dst_port = flow.key.port_a;
    }

    m.num_pkts_out = static_cast<int64_t>(flow.fwd_packets.size());
    m.num_pkts_in = static_cast<int64_t>(flow.rev_packets.size());
    for (const auto& pkt : flow.fwd_packets) m.bytes_out += pkt.payload_len;
    for (const auto& pkt : flow.rev_packets) m.bytes_in += pkt.payload_len;

    m.time_start_us = flow.time_start_us;
    m.time_end_us = flow.time_end_us;
    m.time_length = static_cast<double>(flow.time_end_us - flow.time_start_us) / 1e6;

    m.fwd = direction_stats(flow.fwd_packets, edges);
    m.rev = direction_stats(flow.rev_packets, edges);
    return m;
}

}  // namespace flowkit
