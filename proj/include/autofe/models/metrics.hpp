#pragma once

#include "autofe/models/matrix.hpp"

#include <stdexcept>
#include <vector>

namespace autofe::models {

class MetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EvalMetrics {
    double roc_auc = 0.0;
    double accuracy = 0.0;
};

/// Rank-based AUC of `scores` for positives vs negatives; ties count half.
double binary_auc(const std::vector<double>& scores, const std::vector<bool>& positive);

/// ROC AUC from a probability matrix (one column per class).
/// Two classes present: AUC of the higher class's column. More than two:
/// mean over class pairs (i, j) of [A(i|j) + A(j|i)] / 2, where A(i|j) ranks
/// the rows of classes i and j by score column i. Throws MetricError when
/// fewer than two classes are present.
double roc_auc(const Matrix& scores, const std::vector<int>& labels);

/// Fraction of rows whose argmax column equals the label; ties go to the
/// lowest class index.
double accuracy(const Matrix& scores, const std::vector<int>& labels);

EvalMetrics evaluate_metrics(const Matrix& scores, const std::vector<int>& labels);

}  // namespace autofe::models
