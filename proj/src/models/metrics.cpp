#include "autofe/models/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace autofe::models {

double binary_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double rank_sum = 0.0;
    double n_pos = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        // Tied block occupies ranks i+1 .. j.
        const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) {
            if (positive[order[t]]) {
                rank_sum += mid;
                n_pos += 1.0;
            }
        }
        i = j;
    }
    const double n_neg = static_cast<double>(n) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) throw MetricError("AUC needs both positive and negative rows");
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

namespace {

double pair_auc(const Matrix& scores, const std::vector<int>& labels, int pos, int neg) {
    std::vector<double> s;
    std::vector<bool> p;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != pos && labels[i] != neg) continue;
        s.push_back(scores(i, static_cast<std::size_t>(pos)));
        p.push_back(labels[i] == pos);
    }
    return binary_auc(s, p);
}

}  // namespace

double roc_auc(const Matrix& scores, const std::vector<int>& labels) {
    if (scores.rows() != labels.size()) throw MetricError("score and label counts differ");
    std::set<int> present(labels.begin(), labels.end());
    if (present.size() < 2) throw MetricError("ROC AUC is undefined with fewer than two classes");
    for (int c : present) {
        if (c < 0 || static_cast<std::size_t>(c) >= scores.cols()) throw MetricError("label outside score columns");
    }
    std::vector<int> cls(present.begin(), present.end());
    if (cls.size() == 2) return pair_auc(scores, labels, cls[1], cls[0]);

    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < cls.size(); ++a) {
        for (std::size_t b = a + 1; b < cls.size(); ++b) {
            total += (pair_auc(scores, labels, cls[a], cls[b]) + pair_auc(scores, labels, cls[b], cls[a])) / 2.0;
            ++pairs;
        }
    }
    return total / static_cast<double>(pairs);
}

double accuracy(const Matrix& scores, const std::vector<int>& labels) {
    if (scores.rows() != labels.size()) throw MetricError("score and label counts differ");
    if (labels.empty()) return 0.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto row = scores.row(i);
        std::size_t best = 0;
        for (std::size_t c = 1; c < row.size(); ++c) {
            if (row[c] > row[best]) best = c;
        }
        hits += static_cast<int>(best) == labels[i];
    }
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

EvalMetrics evaluate_metrics(const Matrix& scores, const std::vector<int>& labels) {
    return {roc_auc(scores, labels), accuracy(scores, labels)};
}

}  // namespace autofe::models
