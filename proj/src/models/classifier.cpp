#include "autofe/models/classifier.hpp"

#include <cmath>
#include <stdexcept>

namespace autofe::models {

std::string_view model_kind_name(ModelKind kind) {
    return kind == ModelKind::LogisticRegression ? "logreg" : "forest";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
    if (name == "logreg" || name == "logistic_regression") return ModelKind::LogisticRegression;
    if (name == "forest" || name == "random_forest") return ModelKind::RandomForest;
    return std::nullopt;
}

std::unique_ptr<Classifier> train(const ModelSpec& spec, const Matrix& x, const std::vector<int>& y,
                                  std::size_t n_classes) {
    if (x.rows() != y.size()) throw std::invalid_argument("feature rows and labels differ in length");
    if (x.rows() == 0) throw std::invalid_argument("cannot train on zero rows");
    for (double v : x.data()) {
        if (!std::isfinite(v)) throw std::invalid_argument("training matrix contains a non-finite value");
    }
    for (int label : y) {
        if (label < 0 || static_cast<std::size_t>(label) >= n_classes) throw std::invalid_argument("label out of range");
    }
    if (spec.kind == ModelKind::LogisticRegression) {
        return std::make_unique<LogisticRegression>(LogisticRegression::train(x, y, n_classes, spec.logistic));
    }
    return std::make_unique<RandomForest>(RandomForest::train(x, y, n_classes, spec.forest, spec.seed));
}

}  // namespace autofe::models
