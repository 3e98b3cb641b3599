#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "flowkit/flow.hpp"
#include "flowkit/hist.hpp"

namespace flowkit {

// Per-direction packet statistics. Field names follow the emitted JSON;
// the reverse direction carries the same fields under a rev_ prefix.
struct DirectionStats {
    std::vector<int64_t> intervals_ccnt;                    // |intervals edges|+1 buckets
    std::array<int64_t, 5> ack_psh_rst_syn_fin_cnt{};       // per-flag packet counts
    int64_t hdr_distinct = 0;
    std::vector<int64_t> hdr_ccnt;                          // |hdr edges|+1 buckets
    double hdr_mean = 0.0;
    int64_t hdr_bin_40 = 0;                                 // header length in [28, 40]
    int64_t pld_distinct = 0;
    std::vector<int64_t> pld_ccnt;                          // |pld edges|+1 buckets
    int64_t pld_bin_128 = 0;                                // payload length < 128
    int64_t pld_bin_inf = 0;                                // payload length > 1024
    int64_t pld_max = 0;
    int64_t pld_median = 0;                                 // lower middle for even counts
    double pld_mean = 0.0;
    double pld_var = 0.0;                                   // population variance
};

struct MetadataFeatures {
    std::string sa;
    std::string da;
    int pr = 0;
    int src_port = 0;
    int dst_port = 0;
    int64_t bytes_out = 0;  // transport payload bytes, forward
    int64_t bytes_in = 0;
    int64_t num_pkts_out = 0;
    int64_t num_pkts_in = 0;
    int64_t time_start_us = 0;
    int64_t time_end_us = 0;
    double time_length = 0.0;  // seconds
    DirectionStats fwd;
    DirectionStats rev;
};

MetadataFeatures compute_metadata(const FlowRecord& flow,
                                  const HistogramEdges& edges = HistogramEdges{});

}  // namespace flowkit
