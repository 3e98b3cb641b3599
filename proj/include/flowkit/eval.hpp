#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "flowkit/manifest.hpp"

namespace flowkit {

struct ConfusionMatrix {
    std::vector<std::string> classes;
    std::vector<int64_t> counts;  // k*k row-major, rows = true, cols = predicted

    int64_t at(size_t true_idx, size_t pred_idx) const {
        return counts[true_idx * classes.size() + pred_idx];
    }
    int64_t& at(size_t true_idx, size_t pred_idx) {
        return counts[true_idx * classes.size() + pred_idx];
    }
    int64_t total() const;
    std::string to_csv() const;
};

// Unknown labels are fatal and name the offending position.
ConfusionMatrix confusion(std::span<const std::string> y_true,
                          std::span<const std::string> y_pred,
                          std::span<const std::string> classes);

struct BinaryMetrics {
    double tpr = 0.0;
    double far = 0.0;
    bool degenerate_tpr = false;  // TP+FN was zero
    bool degenerate_far = false;  // TN+FP was zero
};

// tpr = TP/(TP+FN), far = FP/(TN+FP); zero denominators yield 0 with the
// degenerate flag set.
BinaryMetrics binary_metrics(const ConfusionMatrix& cm, const std::string& positive);

struct PerClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::optional<double> average_precision;  // absent without scores or support
    int64_t support = 0;
};

enum class Task { binary, multiclass };

struct EvalReport {
    Task task = Task::multiclass;
    double tpr = 0.0;
    double far = 0.0;
    double f1_weighted = 0.0;  // headline F1
    double f1_macro = 0.0;
    double f1_micro = 0.0;
    double map = 0.0;
    double accuracy = 0.0;
    bool degenerate_scores = false;  // mAP from one-hot labels, not real scores
    std::vector<std::string> zero_support_classes;
    std::map<std::string, PerClassMetrics> per_class;
    ConfusionMatrix cm;

    nlohmann::ordered_json to_json() const;
    std::string to_table() const;  // aligned text table
};

// Per-sample scores for AP: scores[r][c] ranks row r for class c.
struct ScoreSet {
    std::vector<std::string> classes;
    std::vector<std::vector<double>> rows;
};

// Rank-based average precision with threshold grouping and step
// interpolation; ties share one precision/recall point.
double average_precision(std::span<const double> scores, std::span<const uint8_t> positives);

EvalReport multiclass_metrics(const ConfusionMatrix& cm, std::span<const std::string> y_true,
                              const ScoreSet* scores);

// Joins a {id, label[, scores]} JSON-lines prediction file against sealed
// annotations; missing, duplicate, and unknown ids are all rejected by name.
EvalReport score_submission(const std::filesystem::path& predictions,
                            const std::filesystem::path& sealed_labels, Task task,
                            Granularity granularity, const std::string& positive);

}  // namespace flowkit
