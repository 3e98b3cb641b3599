#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "flowkit/dissectors.hpp"
#include "flowkit/metadata.hpp"

namespace flowkit {

// The full per-flow feature bundle. Metadata is always present; the
// protocol families only when the flow carried them.
struct FlowFeatures {
    MetadataFeatures metadata;
    std::optional<TlsFeatures> tls;
    std::optional<DnsFeatures> dns;
    std::optional<HttpFeatures> http;
};

FlowFeatures extract_features(const FlowRecord& flow,
                              const HistogramEdges& edges = HistogramEdges{});

// raw: real addresses plus time_start/time_end (extraction output).
// masked: sa/da replaced by IP_masked, time_length instead of the pair
// (dataset output).
enum class TimeMode { raw, masked };

// One JSON-lines object. Median is spelled "pld_medium" on the wire; id is
// emitted only when present.
nlohmann::ordered_json feature_json(const FlowFeatures& features, TimeMode mode,
                                    std::optional<int64_t> id = std::nullopt);

struct ParsedFlow {
    int64_t id = -1;
    FlowFeatures features;
};

// Tolerant reader for both this tool's output and the published challenge
// files ("pld_median" spelling, numeric or string ciphersuite codes).
ParsedFlow parse_flow_json(const nlohmann::json& line);

std::vector<ParsedFlow> read_features_file(const std::filesystem::path& path);

}  // namespace flowkit
