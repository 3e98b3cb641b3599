#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace flowkit {

enum class Granularity { top, mid, fine };

Granularity parse_granularity(const std::string& name);
const char* to_string(Granularity g);

struct FlowLabels {
    std::string top;
    std::optional<std::string> mid;
    std::string fine;

    // Missing mid-level annotations fall back to the fine-grained class.
    const std::string& at(Granularity g) const {
        switch (g) {
            case Granularity::top: return top;
            case Granularity::mid: return mid ? *mid : fine;
            case Granularity::fine: return fine;
        }
        return fine;
    }
};

struct ManifestEntry {
    std::string glob;  // matched against capture file names
    FlowLabels labels;
};

// Declarative map from capture files to class labels; one capture file is
// assumed to contain flows of a single class.
struct LabelManifest {
    std::string dataset_name;
    std::vector<ManifestEntry> entries;

    static LabelManifest load(const std::filesystem::path& path);

    // First matching entry wins; overlapping globs log a warning elsewhere.
    std::optional<size_t> match(const std::string& filename) const;
};

}  // namespace flowkit
