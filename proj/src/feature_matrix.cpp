#include "flowkit/matrix.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "flowkit/errors.hpp"
#include "flowkit/util.hpp"

namespace flowkit {

namespace {

void append_expanded(std::vector<std::string>& names, const std::string& base, size_t n) {
    for (size_t i = 0; i < n; ++i) names.push_back(base + "_" + std::to_string(i));
}

void direction_columns(std::vector<std::string>& names, const std::string& prefix,
                       const HistogramEdges& edges) {
    append_expanded(names, prefix + "intervals_ccnt", edges.intervals_ms.size() + 1);
    append_expanded(names, prefix + "ack_psh_rst_syn_fin_cnt", 5);
    names.push_back(prefix + "hdr_distinct");
    append_expanded(names, prefix + "hdr_ccnt", edges.hdr_bytes.size() + 1);
    names.push_back(prefix + "hdr_mean");
    names.push_back(prefix + "hdr_bin_40");
    names.push_back(prefix + "pld_distinct");
    append_expanded(names, prefix + "pld_ccnt", edges.pld_bytes.size() + 1);
    names.push_back(prefix + "pld_bin_128");
    names.push_back(prefix + "pld_bin_inf");
    names.push_back(prefix + "pld_max");
    names.push_back(prefix + "pld_median");
    names.push_back(prefix + "pld_mean");
    names.push_back(prefix + "pld_var");
}

void push_direction(std::vector<double>& row, const DirectionStats& d, const HistogramEdges& edges,
                    int64_t flow_id) {
    if (d.intervals_ccnt.size() != edges.intervals_ms.size() + 1 ||
        d.hdr_ccnt.size() != edges.hdr_bytes.size() + 1 ||
        d.pld_ccnt.size() != edges.pld_bytes.size() + 1) {
        throw ValidationError("flow " + std::to_string(flow_id) +
                              " has histogram arrays inconsistent with the schema edges");
    }
    for (int64_t v : d.intervals_ccnt) row.push_back(static_cast<double>(v));
    for (int64_t v : d.ack_psh_rst_syn_fin_cnt) row.push_back(static_cast<double>(v));
    row.push_back(static_cast<double>(d.hdr_distinct));
    for (int64_t v : d.hdr_ccnt) row.push_back(static_cast<double>(v));
    row.push_back(d.hdr_mean);
    row.push_back(static_cast<double>(d.hdr_bin_40));
    row.push_back(static_cast<double>(d.pld_distinct));
    for (int64_t v : d.pld_ccnt) row.push_back(static_cast<double>(v));
    row.push_back(static_cast<double>(d.pld_bin_128));
    row.push_back(static_cast<double>(d.pld_bin_inf));
    row.push_back(static_cast<double>(d.pld_max));
    row.push_back(static_cast<double>(d.pld_median));
    row.push_back(d.pld_mean);
    row.push_back(d.pld_var);
}

FeatureMatrix build_matrix(size_t n, const HistogramEdges& edges,
                           const std::function<const MetadataFeatures&(size_t)>& metadata_of,
                           const std::function<int64_t(size_t)>& id_of) {
    if (n == 0) throw ValidationError("cannot build a feature matrix from zero flows");
    FeatureMatrix matrix;
    matrix.column_names = metadata_column_names(edges);
    matrix.cols = matrix.column_names.size();
    matrix.rows = n;
    matrix.values.reserve(n * matrix.cols);
    matrix.row_ids.reserve(n);

    std::vector<double> row;
    for (size_t i = 0; i < n; ++i) {
        const MetadataFeatures& m = metadata_of(i);
        row.clear();
        row.push_back(static_cast<double>(m.pr));
        row.push_back(static_cast<double>(m.src_port));
        row.push_back(static_cast<double>(m.dst_port));
        row.push_back(static_cast<double>(m.bytes_out));
        row.push_back(static_cast<double>(m.num_pkts_out));
        row.push_back(static_cast<double>(m.bytes_in));
        row.push_back(static_cast<double>(m.num_pkts_in));
        row.push_back(m.time_length);
        push_direction(row, m.fwd, edges, id_of(i));
        push_direction(row, m.rev, edges, id_of(i));
        if (row.size() != matrix.cols)
            throw ValidationError("row width mismatch against column schema");
        matrix.values.insert(matrix.values.end(), row.begin(), row.end());
        matrix.row_ids.push_back(id_of(i));
    }
    return matrix;
}

}  // namespace

std::vector<std::string> metadata_column_names(const HistogramEdges& edges) {
    std::vector<std::string> names = {"pr",       "src_port",     "dst_port",
                                      "bytes_out", "num_pkts_out", "bytes_in",
                                      "num_pkts_in", "time_length"};
    direction_columns(names, "", edges);
    direction_columns(names, "rev_", edges);
    return names;
}

FeatureMatrix to_matrix(std::span<const ParsedFlow> flows, const HistogramEdges& edges) {
    return build_matrix(
        flows.size(), edges,
        [&](size_t i) -> const MetadataFeatures& { return flows[i].features.metadata; },
        [&](size_t i) { return flows[i].id; });
}

FeatureMatrix to_matrix(std::span<const LabeledFlow> flows, const HistogramEdges& edges) {
    return build_matrix(
        flows.size(), edges,
        [&](size_t i) -> const MetadataFeatures& { return flows[i].features.metadata; },
        [&](size_t i) { return flows[i].id; });
}

Scaler fit_scaler(const FeatureMatrix& matrix, std::span<const size_t> fit_rows) {
    if (fit_rows.empty()) throw ValidationError("scaler needs at least one fit row");
    Scaler scaler;
    scaler.mean.assign(matrix.cols, 0.0);
    scaler.stddev.assign(matrix.cols, 0.0);
    double n = static_cast<double>(fit_rows.size());
    for (size_t r : fit_rows) {
        for (size_t c = 0; c < matrix.cols; ++c) scaler.mean[c] += matrix.at(r, c);
    }
    for (size_t c = 0; c < matrix.cols; ++c) scaler.mean[c] /= n;
    for (size_t r : fit_rows) {
        for (size_t c = 0; c < matrix.cols; ++c) {
            double d = matrix.at(r, c) - scaler.mean[c];
            scaler.stddev[c] += d * d;
        }
    }
    for (size_t c = 0; c < matrix.cols; ++c) scaler.stddev[c] = std::sqrt(scaler.stddev[c] / n);
    return scaler;
}

void apply_scaler(FeatureMatrix& matrix, const Scaler& scaler) {
    if (scaler.mean.size() != matrix.cols)
        throw ValidationError("scaler width does not match matrix");
    for (size_t r = 0; r < matrix.rows; ++r) {
        for (size_t c = 0; c < matrix.cols; ++c) {
            double sd = scaler.stddev[c];
            matrix.at(r, c) = sd > 0 ? (matrix.at(r, c) - scaler.mean[c]) / sd : 0.0;
        }
    }
    matrix.scaler = scaler;
}

void standardize(FeatureMatrix& matrix, std::span<const size_t> fit_rows) {
    apply_scaler(matrix, fit_scaler(matrix, fit_rows));
}

std::pair<std::vector<size_t>, std::vector<size_t>> train_val_split(
    std::span<const std::string> labels, double fraction, uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ValidationError("split fraction must lie strictly between 0 and 1");
    std::map<std::string, std::vector<size_t>> by_class;
    for (size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);

    std::vector<size_t> selected, rest;
    for (auto& [cls, indices] : by_class) {
        deterministic_shuffle(indices, seed ^ fnv1a64(cls));
        auto take = static_cast<size_t>(
            std::llround(fraction * static_cast<double>(indices.size())));
        for (size_t i = 0; i < indices.size(); ++i)
            (i < take ? selected : rest).push_back(indices[i]);
    }
    std::sort(selected.begin(), selected.end());
    std::sort(rest.begin(), rest.end());
    return {std::move(selected), std::move(rest)};
}

void write_matrix_csv(const FeatureMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write matrix file: " + path.string());
    out << "id";
    for (const auto& name : matrix.column_names) out << "," << name;
    out << "\n";
    out.precision(17);
    for (size_t r = 0; r < matrix.rows; ++r) {
        out << matrix.row_ids[r];
        for (size_t c = 0; c < matrix.cols; ++c) out << "," << matrix.at(r, c);
        out << "\n";
    }
}

}  // namespace flowkit
