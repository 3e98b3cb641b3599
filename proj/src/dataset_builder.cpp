#include "flowkit/dataset.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <fstream>

#include "flowkit/errors.hpp"
#include "flowkit/log.hpp"
#include "flowkit/util.hpp"

namespace flowkit {

namespace {

constexpr const char* kMaskedIp = "IP_masked";

struct ResolvedCapture {
    std::filesystem::path path;
    size_t entry_index;
};

// Manifest entry order first, then name order within an entry. A capture
// matched by a second entry stays with the first and logs a warning.
std::vector<ResolvedCapture> resolve_captures(const LabelManifest& manifest,
                                              const std::filesystem::path& captures_dir,
                                              std::vector<std::string>* warnings) {
    if (!std::filesystem::is_directory(captures_dir))
        throw ValidationError("captures directory does not exist: " + captures_dir.string());

    std::vector<std::string> files;
    for (const auto& entry : std::filesystem::directory_iterator(captures_dir)) {
        if (entry.is_regular_file() && CaptureReader::looks_like_capture(entry.path()))
            files.push_back(entry.path().filename().string());
    }
    std::sort(files.begin(), files.end());

    std::map<std::string, size_t> assignment;
    std::vector<bool> entry_used(manifest.entries.size(), false);
    for (const auto& file : files) {
        bool assigned = false;
        for (size_t i = 0; i < manifest.entries.size(); ++i) {
            if (fnmatch(manifest.entries[i].glob.c_str(), file.c_str(), 0) == 0) {
                if (!assigned) {
                    assignment[file] = i;
                    entry_used[i] = true;
                    assigned = true;
                } else if (warnings) {
                    warnings->push_back("capture " + file + " also matches manifest entry '" +
                                        manifest.entries[i].glob + "'; first match wins");
                }
            }
        }
        if (!assigned)
            throw ValidationError("capture matched by no manifest entry: " + file);
    }
    for (size_t i = 0; i < manifest.entries.size(); ++i) {
        if (!entry_used[i])
            throw ValidationError("manifest glob matches no capture: " +
                                  manifest.entries[i].glob);
    }

    std::vector<ResolvedCapture> resolved;
    for (size_t i = 0; i < manifest.entries.size(); ++i) {
        for (const auto& [file, idx] : assignment) {
            if (idx == i) resolved.push_back({captures_dir / file, i});
        }
    }
    return resolved;
}

}  // namespace

DatasetSplit split_classes(std::vector<LabeledFlow> flows, uint64_t seed,
                           std::vector<std::string>* warnings) {
    std::map<std::string, std::vector<size_t>> by_class;
    for (size_t i = 0; i < flows.size(); ++i) by_class[flows[i].labels.fine].push_back(i);

    DatasetSplit split;
    split.seed = seed;
    for (auto& [cls, indices] : by_class) {
        SplitAllocation alloc;
        alloc.total = static_cast<int64_t>(indices.size());
        if (indices.size() < 3) {
            if (warnings)
                warnings->push_back("class '" + cls + "' has fewer than 3 flows; all go to train");
            alloc.train = alloc.total;
            for (size_t i : indices) split.train.push_back(std::move(flows[i]));
            split.allocation[cls] = alloc;
            continue;
        }
        deterministic_shuffle(indices, seed ^ fnv1a64(cls));
        int64_t n = alloc.total;
        int64_t n_challenge = round_fraction(n, 1, 10);
        int64_t n_std = round_fraction(n, 1, 10);
        alloc.test_challenge = n_challenge;
        alloc.test_std = n_std;
        alloc.train = n - n_challenge - n_std;
        for (int64_t i = 0; i < n; ++i) {
            LabeledFlow& flow = flows[indices[static_cast<size_t>(i)]];
            if (i < n_challenge) {
                split.test_challenge.push_back(std::move(flow));
            } else if (i < n_challenge + n_std) {
                split.test_std.push_back(std::move(flow));
            } else {
                split.train.push_back(std::move(flow));
            }
        }
        split.allocation[cls] = alloc;
    }

    auto by_id = [](const LabeledFlow& a, const LabeledFlow& b) { return a.id < b.id; };
    std::sort(split.train.begin(), split.train.end(), by_id);
    std::sort(split.test_std.begin(), split.test_std.end(), by_id);
    std::sort(split.test_challenge.begin(), split.test_challenge.end(), by_id);
    return split;
}

DatasetSplit build_dataset(const LabelManifest& manifest, const std::filesystem::path& captures_dir,
                           const BuildConfig& config, BuildSummary* summary) {
    config.edges.validate();
    BuildSummary local;
    BuildSummary& sum = summary ? *summary : local;
    sum.dataset_name = manifest.dataset_name;
    sum.seed = config.seed;

    auto resolved = resolve_captures(manifest, captures_dir, &sum.warnings);

    std::vector<LabeledFlow> flows;
    int64_t next_id = 0;
    for (const auto& capture : resolved) {
        CaptureStats stats;
        stats.file = capture.path.filename().string();
        log_event(LogLevel::info, "capture_start", {{"file", stats.file}});

        auto reader = CaptureReader::open(capture.path);
        FlowAssembler assembler(config.idle_timeout_us);
        std::vector<FlowRecord> records;
        while (auto frame = reader->next()) {
            ++stats.frames;
            DecodeResult result = decode_packet(frame->data, frame->link, frame->timestamp_us);
            if (auto* reason = std::get_if<SkipReason>(&result)) {
                ++stats.skips[to_string(*reason)];
                continue;
            }
            auto& pkt = std::get<PacketRecord>(result);
            if (!passes_filter(pkt, config.filter_rules)) {
                ++stats.filtered_out;
                continue;
            }
            ++stats.decoded;
            auto emitted = assembler.push(pkt);
            std::move(emitted.begin(), emitted.end(), std::back_inserter(records));
        }
        auto rest = assembler.finish();
        std::move(rest.begin(), rest.end(), std::back_inserter(records));
        stats.flows = records.size();

        // Feature extraction is pure per flow; chunks keep emission order.
        std::vector<FlowFeatures> features(records.size());
        parallel_for(records.size(), [&](size_t begin, size_t end) {
            for (size_t i = begin; i < end; ++i)
                features[i] = extract_features(records[i], config.edges);
        });

        const FlowLabels& labels = manifest.entries[capture.entry_index].labels;
        for (auto& f : features) {
            LabeledFlow flow;
            flow.id = next_id++;
            flow.features = std::move(f);
            flow.features.metadata.sa = kMaskedIp;
            flow.features.metadata.da = kMaskedIp;
            flow.labels = labels;
            flows.push_back(std::move(flow));
        }

        log_event(LogLevel::info, "capture_done",
                  {{"file", stats.file}, {"frames", stats.frames}, {"flows", stats.flows}});
        sum.captures.push_back(std::move(stats));
    }

    sum.total_flows = static_cast<int64_t>(flows.size());
    DatasetSplit split = split_classes(std::move(flows), config.seed, &sum.warnings);
    for (const auto& w : sum.warnings) log_event(LogLevel::warn, "build_warning", {{"detail", w}});
    return split;
}

std::map<std::string, int64_t> class_distribution(std::span<const LabeledFlow> flows,
                                                  Granularity granularity) {
    std::map<std::string, int64_t> counts;
    for (const auto& flow : flows) ++counts[flow.labels.at(granularity)];
    return counts;
}

namespace {

void write_split_files(const std::vector<LabeledFlow>& flows, const std::filesystem::path& features_path,
                       const std::filesystem::path& annotations_path) {
    std::ofstream features(features_path);
    if (!features) throw ValidationError("cannot write " + features_path.string());
    std::ofstream annotations(annotations_path);
    if (!annotations) throw ValidationError("cannot write " + annotations_path.string());
    for (const auto& flow : flows) {
        features << feature_json(flow.features, TimeMode::masked, flow.id).dump() << "\n";
        nlohmann::ordered_json ann;
        ann["id"] = flow.id;
        ann["top"] = flow.labels.top;
        if (flow.labels.mid) ann["mid"] = *flow.labels.mid;
        ann["fine"] = flow.labels.fine;
        annotations << ann.dump() << "\n";
    }
}

}  // namespace

void write_dataset(const DatasetSplit& split, const BuildSummary& summary,
                   const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::filesystem::create_directories(out_dir / "sealed");

    write_split_files(split.train, out_dir / "train_features.jsonl",
                      out_dir / "train_annotations.jsonl");
    write_split_files(split.test_std, out_dir / "test_std_features.jsonl",
                      out_dir / "test_std_annotations.jsonl");

    // Challenge features ship openly; their labels only in the sealed file.
    {
        std::ofstream features(out_dir / "test_challenge_features.jsonl");
        if (!features) throw ValidationError("cannot write test_challenge_features.jsonl");
        for (const auto& flow : split.test_challenge)
            features << feature_json(flow.features, TimeMode::masked, flow.id).dump() << "\n";
        std::ofstream sealed(out_dir / "sealed" / "test_challenge_annotations.jsonl");
        if (!sealed) throw ValidationError("cannot write sealed annotations");
        for (const auto& flow : split.test_challenge) {
            nlohmann::ordered_json ann;
            ann["id"] = flow.id;
            ann["top"] = flow.labels.top;
            if (flow.labels.mid) ann["mid"] = *flow.labels.mid;
            ann["fine"] = flow.labels.fine;
            sealed << ann.dump() << "\n";
        }
    }

    nlohmann::ordered_json doc;
    doc["dataset_name"] = summary.dataset_name;
    doc["seed"] = split.seed;
    doc["total_flows"] = summary.total_flows;
    doc["split_sizes"] = {{"train", split.train.size()},
                          {"test_std", split.test_std.size()},
                          {"test_challenge", split.test_challenge.size()}};
    nlohmann::ordered_json alloc;
    for (const auto& [cls, a] : split.allocation) {
        alloc[cls] = {{"total", a.total},
                      {"train", a.train},
                      {"test_std", a.test_std},
                      {"test_challenge", a.test_challenge}};
    }
    doc["allocation"] = alloc;
    nlohmann::ordered_json caps = nlohmann::ordered_json::array();
    for (const auto& c : summary.captures) {
        nlohmann::ordered_json entry;
        entry["file"] = c.file;
        entry["frames"] = c.frames;
        entry["decoded"] = c.decoded;
        entry["filtered_out"] = c.filtered_out;
        entry["flows"] = c.flows;
        entry["skips"] = c.skips;
        caps.push_back(entry);
    }
    doc["captures"] = caps;
    doc["warnings"] = summary.warnings;

    std::ofstream out(out_dir / "summary.json");
    if (!out) throw ValidationError("cannot write summary.json");
    out << doc.dump(2) << "\n";
}

}  // namespace flowkit
