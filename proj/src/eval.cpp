#include "flowkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "flowkit/errors.hpp"

namespace flowkit {

int64_t ConfusionMatrix::total() const {
    return std::accumulate(counts.begin(), counts.end(), int64_t{0});
}

std::string ConfusionMatrix::to_csv() const {
    std::ostringstream out;
    out << "true\\pred";
    for (const auto& c : classes) out << "," << c;
    out << "\n";
    for (size_t i = 0; i < classes.size(); ++i) {
        out << classes[i];
        for (size_t j = 0; j < classes.size(); ++j) out << "," << at(i, j);
        out << "\n";
    }
    return out.str();
}

ConfusionMatrix confusion(std::span<const std::string> y_true,
                          std::span<const std::string> y_pred,
                          std::span<const std::string> classes) {
    if (y_true.size() != y_pred.size())
        throw ValidationError("confusion: label vectors differ in length");
    ConfusionMatrix cm;
    cm.classes.assign(classes.begin(), classes.end());
    cm.counts.assign(classes.size() * classes.size(), 0);
    std::unordered_map<std::string, size_t> index;
    for (size_t i = 0; i < classes.size(); ++i) index[classes[i]] = i;
    for (size_t n = 0; n < y_true.size(); ++n) {
        auto ti = index.find(y_true[n]);
        if (ti == index.end())
            throw ValidationError("confusion: unknown true label '" + y_true[n] + "' at sample " +
                                  std::to_string(n));
        auto pi = index.find(y_pred[n]);
        if (pi == index.end())
            throw ValidationError("confusion: unknown predicted label '" + y_pred[n] +
                                  "' at sample " + std::to_string(n));
        ++cm.at(ti->second, pi->second);
    }
    return cm;
}

BinaryMetrics binary_metrics(const ConfusionMatrix& cm, const std::string& positive) {
    if (cm.classes.size() != 2)
        throw ValidationError("binary metrics need a 2-class confusion matrix");
    size_t pos = cm.classes[0] == positive ? 0 : 1;
    if (cm.classes[pos] != positive)
        throw ValidationError("positive class '" + positive + "' not in confusion matrix");
    size_t neg = 1 - pos;
    double tp = static_cast<double>(cm.at(pos, pos));
    double fn = static_cast<double>(cm.at(pos, neg));
    double fp = static_cast<double>(cm.at(neg, pos));
    double tn = static_cast<double>(cm.at(neg, neg));

    BinaryMetrics m;
    if (tp + fn > 0) {
        m.tpr = tp / (tp + fn);
    } else {
        m.degenerate_tpr = true;
    }
    if (tn + fp > 0) {
        m.far = fp / (tn + fp);
    } else {
        m.degenerate_far = true;
    }
    return m;
}

double average_precision(std::span<const double> scores, std::span<const uint8_t> positives) {
    int64_t total_pos = 0;
    for (uint8_t p : positives) total_pos += p != 0;
    if (total_pos == 0) return 0.0;

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    double prev_recall = 0.0;
    int64_t tp = 0, seen = 0;
    size_t i = 0;
    while (i < order.size()) {
        // One threshold step covers the whole tie group.
        size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            tp += positives[order[j]] != 0;
            ++seen;
            ++j;
        }
        double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
        double precision = static_cast<double>(tp) / static_cast<double>(seen);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return ap;
}

EvalReport multiclass_metrics(const ConfusionMatrix& cm, std::span<const std::string> y_true,
                              const ScoreSet* scores) {
    EvalReport report;
    report.task = Task::multiclass;
    report.cm = cm;

    size_t k = cm.classes.size();
    int64_t total = cm.total();
    int64_t diag = 0;
    for (size_t i = 0; i < k; ++i) diag += cm.at(i, i);
    report.accuracy = total > 0 ? static_cast<double>(diag) / static_cast<double>(total) : 0.0;
    // With one label per sample, micro-averaged F1 collapses to accuracy.
    report.f1_micro = report.accuracy;

    double weighted_sum = 0.0, macro_sum = 0.0;
    int64_t support_total = 0;
    size_t macro_n = 0;
    for (size_t i = 0; i < k; ++i) {
        PerClassMetrics pc;
        int64_t row = 0, col = 0;
        for (size_t j = 0; j < k; ++j) {
            row += cm.at(i, j);
            col += cm.at(j, i);
        }
        pc.support = row;
        int64_t tp = cm.at(i, i);
        pc.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
        pc.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
        pc.f1 = pc.precision + pc.recall > 0
                    ? 2 * pc.precision * pc.recall / (pc.precision + pc.recall)
                    : 0.0;
        if (row == 0) {
            report.zero_support_classes.push_back(cm.classes[i]);
        } else {
            weighted_sum += pc.f1 * static_cast<double>(row);
            macro_sum += pc.f1;
            support_total += row;
            ++macro_n;
        }
        report.per_class[cm.classes[i]] = pc;
    }
    report.f1_weighted = support_total > 0 ? weighted_sum / static_cast<double>(support_total) : 0.0;
    report.f1_macro = macro_n > 0 ? macro_sum / static_cast<double>(macro_n) : 0.0;

    if (scores) {
        if (scores->rows.size() != y_true.size())
            throw ValidationError("score matrix rows do not match sample count");
        double ap_sum = 0.0;
        size_t ap_n = 0;
        for (size_t c = 0; c < scores->classes.size(); ++c) {
            const std::string& cls = scores->classes[c];
            std::vector<double> class_scores(y_true.size());
            std::vector<bool> positives(y_true.size());
            int64_t pos = 0;
            for (size_t r = 0; r < y_true.size(); ++r) {
                class_scores[r] = scores->rows[r][c];
                positives[r] = y_true[r] == cls;
                pos += positives[r];
            }
            auto it = report.per_class.find(cls);
            if (pos == 0) continue;  // zero-support: excluded, already flagged
            std::vector<bool> pos_vec(positives.begin(), positives.end());
            double ap = average_precision(class_scores, pos_vec);
            if (it != report.per_class.end()) it->second.average_precision = ap;
            ap_sum += ap;
            ++ap_n;
        }
        report.map = ap_n > 0 ? ap_sum / static_cast<double>(ap_n) : 0.0;
    }
    return report;
}

nlohmann::ordered_json EvalReport::to_json() const {
    nlohmann::ordered_json doc;
    doc["task"] = task == Task::binary ? "binary" : "multiclass";
    if (task == Task::binary) {
        doc["tpr"] = tpr;
        doc["far"] = far;
    } else {
        doc["f1"] = f1_weighted;
        doc["f1_averaging"] = "weighted";
        doc["f1_macro"] = f1_macro;
        doc["f1_micro"] = f1_micro;
        doc["map"] = map;
        if (degenerate_scores) doc["degenerate_scores"] = true;
    }
    doc["accuracy"] = accuracy;
    if (!zero_support_classes.empty()) doc["zero_support_classes"] = zero_support_classes;
    nlohmann::ordered_json per;
    for (const auto& [cls, pc] : per_class) {
        nlohmann::ordered_json entry;
        entry["precision"] = pc.precision;
        entry["recall"] = pc.recall;
        entry["f1"] = pc.f1;
        if (pc.average_precision) entry["average_precision"] = *pc.average_precision;
        entry["support"] = pc.support;
        per[cls] = entry;
    }
    doc["per_class"] = per;
    doc["confusion"] = {{"classes", cm.classes}, {"counts", cm.counts}};
    return doc;
}

std::string EvalReport::to_table() const {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(4);
    if (task == Task::binary) {
        out << "task: binary\n";
        out << "TPR  " << tpr << "\n";
        out << "FAR  " << far << "\n";
    } else {
        out << "task: multiclass\n";
        out << "F1 (weighted)  " << f1_weighted << "\n";
        out << "F1 (macro)     " << f1_macro << "\n";
        out << "F1 (micro)     " << f1_micro << "\n";
        out << "mAP            " << map << (degenerate_scores ? "  (one-hot scores)" : "") << "\n";
    }
    out << "accuracy       " << accuracy << "\n";
    size_t width = 5;
    for (const auto& [cls, pc] : per_class) width = std::max(width, cls.size());
    out << "\n" << std::string(width, ' ') << "  precision  recall      f1      AP  support\n";
    for (const auto& [cls, pc] : per_class) {
        out << std::string(width - cls.size(), ' ') << cls << "  " << std::setw(9) << pc.precision
            << "  " << std::setw(6) << pc.recall << "  " << std::setw(6) << pc.f1 << "  ";
        if (pc.average_precision) {
            out << std::setw(6) << *pc.average_precision;
        } else {
            out << "     -";
        }
        out << "  " << std::setw(7) << pc.support << "\n";
    }
    return out.str();
}

namespace {

struct SealedEntry {
    FlowLabels labels;
};

std::map<int64_t, FlowLabels> read_sealed(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open sealed labels: " + path.string());
    std::map<int64_t, FlowLabels> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": bad JSON: " + e.what());
        }
        FlowLabels labels;
        labels.top = doc.value("top", std::string{});
        labels.fine = doc.value("fine", std::string{});
        if (doc.contains("mid") && doc["mid"].is_string())
            labels.mid = doc["mid"].get<std::string>();
        if (labels.fine.empty() && doc.contains("label"))
            labels.fine = labels.top = doc["label"].get<std::string>();
        out[doc.at("id").get<int64_t>()] = std::move(labels);
    }
    return out;
}

std::string join_ids(const std::vector<int64_t>& ids) {
    std::ostringstream out;
    for (size_t i = 0; i < ids.size(); ++i) out << (i ? ", " : "") << ids[i];
    return out.str();
}

}  // namespace

EvalReport score_submission(const std::filesystem::path& predictions,
                            const std::filesystem::path& sealed_labels, Task task,
                            Granularity granularity, const std::string& positive) {
    auto sealed = read_sealed(sealed_labels);

    std::ifstream in(predictions);
    if (!in) throw ValidationError("cannot open predictions: " + predictions.string());

    std::map<int64_t, std::string> predicted;
    std::map<int64_t, std::map<std::string, double>> predicted_scores;
    std::vector<int64_t> duplicates, unknown;
    std::string line;
    size_t line_no = 0;
    bool any_scores = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(predictions.string() + ":" + std::to_string(line_no) +
                                  ": bad JSON: " + e.what());
        }
        int64_t id = doc.at("id").get<int64_t>();
        if (!sealed.count(id)) {
            unknown.push_back(id);
            continue;
        }
        if (predicted.count(id)) {
            duplicates.push_back(id);
            continue;
        }
        predicted[id] = doc.at("label").get<std::string>();
        if (doc.contains("scores") && doc["scores"].is_object()) {
            any_scores = true;
            for (const auto& [cls, v] : doc["scores"].items())
                predicted_scores[id][cls] = v.get<double>();
        }
    }

    std::vector<int64_t> missing;
    for (const auto& [id, labels] : sealed) {
        if (!predicted.count(id)) missing.push_back(id);
    }
    if (!missing.empty() || !duplicates.empty() || !unknown.empty()) {
        std::ostringstream msg;
        msg << "submission rejected:";
        if (!missing.empty()) msg << " missing ids [" << join_ids(missing) << "]";
        if (!duplicates.empty()) msg << " duplicate ids [" << join_ids(duplicates) << "]";
        if (!unknown.empty()) msg << " unknown ids [" << join_ids(unknown) << "]";
        throw ValidationError(msg.str());
    }

    std::vector<std::string> y_true, y_pred;
    std::vector<int64_t> ids;
    y_true.reserve(sealed.size());
    for (const auto& [id, labels] : sealed) {
        y_true.push_back(labels.at(granularity));
        y_pred.push_back(predicted[id]);
        ids.push_back(id);
    }

    std::set<std::string> class_set(y_true.begin(), y_true.end());
    for (const auto& p : y_pred) {
        if (!class_set.count(p))
            throw ValidationError("prediction uses label '" + p +
                                  "' that does not occur in the sealed annotations");
    }
    std::vector<std::string> classes(class_set.begin(), class_set.end());

    ConfusionMatrix cm = confusion(y_true, y_pred, classes);
    if (task == Task::binary) {
        BinaryMetrics bm = binary_metrics(cm, positive);
        EvalReport report;
        report.task = Task::binary;
        report.tpr = bm.tpr;
        report.far = bm.far;
        report.cm = cm;
        int64_t diag = 0;
        for (size_t i = 0; i < classes.size(); ++i) diag += cm.at(i, i);
        report.accuracy = static_cast<double>(diag) / static_cast<double>(cm.total());
        for (size_t i = 0; i < classes.size(); ++i) {
            PerClassMetrics pc;
            int64_t row = 0, col = 0;
            for (size_t j = 0; j < classes.size(); ++j) {
                row += cm.at(i, j);
                col += cm.at(j, i);
            }
            pc.support = row;
            int64_t tp = cm.at(i, i);
            pc.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
            pc.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
            pc.f1 = pc.precision + pc.recall > 0
                        ? 2 * pc.precision * pc.recall / (pc.precision + pc.recall)
                        : 0.0;
            report.per_class[classes[i]] = pc;
        }
        return report;
    }

    // Multiclass: real scores when the file carries them, one-hot otherwise.
    ScoreSet scores;
    scores.classes = classes;
    scores.rows.resize(ids.size(), std::vector<double>(classes.size(), 0.0));
    for (size_t r = 0; r < ids.size(); ++r) {
        auto it = predicted_scores.find(ids[r]);
        if (any_scores && it != predicted_scores.end()) {
            for (size_t c = 0; c < classes.size(); ++c) {
                auto sit = it->second.find(classes[c]);
                scores.rows[r][c] = sit != it->second.end() ? sit->second : 0.0;
            }
        } else {
            for (size_t c = 0; c < classes.size(); ++c)
                scores.rows[r][c] = y_pred[r] == classes[c] ? 1.0 : 0.0;
        }
    }
    EvalReport report = multiclass_metrics(cm, y_true, &scores);
    report.degenerate_scores = !any_scores;
    return report;
}

}  // namespace flowkit
