#include "flowkit/manifest.hpp"

#include <fnmatch.h>

#include <fstream>

#include "json.hpp"

#include "flowkit/errors.hpp"

namespace flowkit {

Granularity parse_granularity(const std::string& name) {
    if (name == "top") return Granularity::top;
    if (name == "mid") return Granularity::mid;
    if (name == "fine") return Granularity::fine;
    throw ValidationError("unknown granularity: " + name + " (expected top|mid|fine)");
}

const char* to_string(Granularity g) {
    switch (g) {
        case Granularity::top: return "top";
        case Granularity::mid: return "mid";
        case Granularity::fine: return "fine";
    }
    return "?";
}

LabelManifest LabelManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open manifest: " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("bad manifest JSON in " + path.string() + ": " + e.what());
    }

    LabelManifest manifest;
    manifest.dataset_name = doc.value("dataset_name", std::string("dataset"));
    if (!doc.contains("entries") || !doc["entries"].is_array() || doc["entries"].empty())
        throw ValidationError("manifest has no entries: " + path.string());
    for (const auto& entry : doc["entries"]) {
        ManifestEntry e;
        e.glob = entry.at("glob").get<std::string>();
        e.labels.top = entry.at("top").get<std::string>();
        e.labels.fine = entry.at("fine").get<std::string>();
        if (entry.contains("mid") && entry["mid"].is_string())
            e.labels.mid = entry["mid"].get<std::string>();
        if (e.glob.empty() || e.labels.top.empty() || e.labels.fine.empty())
            throw ValidationError("manifest entry with empty glob or label in " + path.string());
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

std::optional<size_t> LabelManifest::match(const std::string& filename) const {
    for (size_t i = 0; i < entries.size(); ++i) {
        if (fnmatch(entries[i].glob.c_str(), filename.c_str(), 0) == 0) return i;
    }
    return std::nullopt;
}

}  // namespace flowkit
