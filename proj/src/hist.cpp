#include "flowkit/hist.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"

#include "flowkit/errors.hpp"

namespace flowkit {

std::vector<int64_t> compact_hist(std::span<const int64_t> values, std::span<const int64_t> edges) {
    std::vector<int64_t> counts(edges.size() + 1, 0);
    for (int64_t v : values) {
        // Buckets are closed on their left edge: v == edges[i] lands in bucket i+1.
        size_t i = static_cast<size_t>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin());
        ++counts[i];
    }
    return counts;
}

void HistogramEdges::validate() const {
    auto check = [](const std::vector<int64_t>& edges, const char* name) {
        if (edges.empty()) throw ValidationError(std::string(name) + " edges must be non-empty");
        for (size_t i = 1; i < edges.size(); ++i) {
            if (edges[i] <= edges[i - 1])
                throw ValidationError(std::string(name) + " edges must be strictly ascending");
        }
    };
    check(intervals_ms, "intervals");
    check(hdr_bytes, "hdr");
    check(pld_bytes, "pld");
}

HistogramEdges HistogramEdges::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open edges file: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("bad edges JSON in " + path.string() + ": " + e.what());
    }
    HistogramEdges edges;
    if (doc.contains("intervals_ms")) edges.intervals_ms = doc["intervals_ms"].get<std::vector<int64_t>>();
    if (doc.contains("hdr_bytes")) edges.hdr_bytes = doc["hdr_bytes"].get<std::vector<int64_t>>();
    if (doc.contains("pld_bytes")) edges.pld_bytes = doc["pld_bytes"].get<std::vector<int64_t>>();
    edges.validate();
    return edges;
}

}  // namespace flowkit
