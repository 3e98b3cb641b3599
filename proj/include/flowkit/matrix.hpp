#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flowkit/dataset.hpp"

namespace flowkit {

// Per-column standardization statistics, fitted on training rows only.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;  // population convention; 0 marks a constant column
};

struct FeatureMatrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> values;  // row-major
    std::vector<std::string> column_names;
    std::vector<int64_t> row_ids;
    std::optional<Scaler> scaler;  // present once standardized

    double& at(size_t r, size_t c) { return values[r * cols + c]; }
    double at(size_t r, size_t c) const { return values[r * cols + c]; }
};

// The frozen metadata column order: scalars in Table order, each array
// feature expanded as name_0..name_k, forward block then rev_ block.
// sa/da never enter the matrix.
std::vector<std::string> metadata_column_names(const HistogramEdges& edges = HistogramEdges{});

FeatureMatrix to_matrix(std::span<const ParsedFlow> flows,
                        const HistogramEdges& edges = HistogramEdges{});
FeatureMatrix to_matrix(std::span<const LabeledFlow> flows,
                        const HistogramEdges& edges = HistogramEdges{});

Scaler fit_scaler(const FeatureMatrix& matrix, std::span<const size_t> fit_rows);

// x' = (x - mean)/stddev per column; constant columns map to 0.
void apply_scaler(FeatureMatrix& matrix, const Scaler& scaler);

// Fits on fit_rows, transforms every row, and stores the scaler.
void standardize(FeatureMatrix& matrix, std::span<const size_t> fit_rows);

// Seeded stratified row split; first element gets round(fraction*n) rows
// per class. Returns (selected, rest) index lists in ascending order.
std::pair<std::vector<size_t>, std::vector<size_t>> train_val_split(
    std::span<const std::string> labels, double fraction, uint64_t seed);

// Columnar text export: header row of column names, one row per flow.
void write_matrix_csv(const FeatureMatrix& matrix, const std::filesystem::path& path);

}  // namespace flowkit
