#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "flowkit/capture.hpp"
#include "flowkit/features.hpp"
#include "flowkit/manifest.hpp"

namespace flowkit {

inline constexpr uint64_t kDefaultSeed = 7;

struct LabeledFlow {
    int64_t id = 0;
    FlowFeatures features;  // sa/da masked, time_length populated
    FlowLabels labels;
};

struct SplitAllocation {
    int64_t total = 0;
    int64_t train = 0;
    int64_t test_std = 0;
    int64_t test_challenge = 0;
};

struct DatasetSplit {
    std::vector<LabeledFlow> train;
    std::vector<LabeledFlow> test_std;
    std::vector<LabeledFlow> test_challenge;
    uint64_t seed = kDefaultSeed;
    std::map<std::string, SplitAllocation> allocation;  // fine-grained class
};

struct BuildConfig {
    uint64_t seed = kDefaultSeed;
    int64_t idle_timeout_us = kDefaultIdleTimeoutUs;
    HistogramEdges edges;
    std::vector<FilterRule> filter_rules;
};

struct CaptureStats {
    std::string file;
    uint64_t frames = 0;
    uint64_t decoded = 0;
    uint64_t filtered_out = 0;
    std::map<std::string, uint64_t> skips;  // reason -> count
    uint64_t flows = 0;
};

struct BuildSummary {
    std::string dataset_name;
    uint64_t seed = 0;
    int64_t total_flows = 0;
    std::vector<CaptureStats> captures;
    std::vector<std::string> warnings;
};

// The whole preparation pipeline: resolve the manifest against the capture
// directory, decode+assemble+extract, mask addresses, swap the timestamp
// pair for time_length, assign dense ids in (capture order, emission
// order), then split 80/10/10 per fine-grained class.
DatasetSplit build_dataset(const LabelManifest& manifest, const std::filesystem::path& captures_dir,
                           const BuildConfig& config, BuildSummary* summary = nullptr);

// The stratified split step alone. Classes with fewer than 3 flows go
// entirely to train (a warning is recorded when a summary is given).
DatasetSplit split_classes(std::vector<LabeledFlow> flows, uint64_t seed,
                           std::vector<std::string>* warnings = nullptr);

std::map<std::string, int64_t> class_distribution(std::span<const LabeledFlow> flows,
                                                  Granularity granularity);

// JSON-lines outputs: per-split features and annotations, the sealed
// test-challenge annotations under sealed/, and summary.json.
void write_dataset(const DatasetSplit& split, const BuildSummary& summary,
                   const std::filesystem::path& out_dir);

}  // namespace flowkit
