#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace flowkit {

// Fixed-bucket count array: counts[0] holds v < edges[0], counts[i] holds
// edges[i-1] <= v < edges[i], counts.back() holds v >= edges.back().
// Sum of counts always equals |values|.
std::vector<int64_t> compact_hist(std::span<const int64_t> values, std::span<const int64_t> edges);

// Bucket edges for the compact histograms. The defaults are frozen in
// data/feature_schema.json; override files use the same layout.
struct HistogramEdges {
    std::vector<int64_t> intervals_ms{1, 5, 10, 50, 100, 200, 500, 1000, 5000};
    std::vector<int64_t> hdr_bytes{20, 28, 40, 60, 80};
    std::vector<int64_t> pld_bytes{32, 64, 128, 256, 512, 1024, 1460};

    static HistogramEdges load(const std::filesystem::path& path);  // throws ValidationError
    void validate() const;                                          // strictly ascending, non-empty
};

}  // namespace flowkit
