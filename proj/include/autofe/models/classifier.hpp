#pragma once

#include "autofe/models/matrix.hpp"
#include "autofe/models/preprocess.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace autofe::models {

enum class ModelKind { LogisticRegression, RandomForest };

std::string_view model_kind_name(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);

struct LogisticParams {
    double l2 = 1e-3;
    int max_iterations = 500;
    double tolerance = 1e-6;
};

struct ForestParams {
    int n_trees = 50;
    int max_depth = 8;
    int min_leaf = 2;
};

struct ModelSpec {
    ModelKind kind = ModelKind::LogisticRegression;
    LogisticParams logistic;
    ForestParams forest;
    std::uint64_t seed = 0;

    /// Logistic regression wants one-hot inputs, trees take ordinals.
    Encoding encoding() const { return kind == ModelKind::LogisticRegression ? Encoding::OneHot : Encoding::Ordinal; }
};

class Classifier {
public:
    virtual ~Classifier() = default;
    virtual std::size_t n_classes() const = 0;
    virtual std::size_t n_features() const = 0;
    /// Row-stochastic class probabilities, one column per class.
    virtual Matrix predict_proba(const Matrix& x) const = 0;
};

/// Multinomial logistic regression with an L2 penalty on the weights (not
/// the bias). Parameters are stored as a (d + 1) x K matrix, bias last.
class LogisticRegression : public Classifier {
public:
    LogisticRegression(std::size_t n_features, std::size_t n_classes);

    static LogisticRegression train(const Matrix& x, const std::vector<int>& y, std::size_t n_classes,
                                    const LogisticParams& params = {});

    std::size_t n_classes() const override { return k_; }
    std::size_t n_features() const override { return d_; }
    Matrix predict_proba(const Matrix& x) const override;

    const std::vector<double>& parameters() const { return w_; }
    void set_parameters(std::vector<double> w);
    /// Objective value after each accepted step, starting with the initial one.
    const std::vector<double>& loss_history() const { return loss_history_; }

    /// Mean cross-entropy + l2/2 * ||W||^2 at parameters `w`; fills `grad`
    /// (same layout) when non-null.
    static double loss_and_gradient(const Matrix& x, const std::vector<int>& y, std::size_t n_classes,
                                    const std::vector<double>& w, double l2, std::vector<double>* grad);

private:
    std::size_t d_;
    std::size_t k_;
    std::vector<double> w_;
    std::vector<double> loss_history_;
};

/// Bagged CART trees with Gini splits. predict_proba returns the fraction of
/// trees voting for each class.
class RandomForest : public Classifier {
public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int label = 0;
    };
    using Tree = std::vector<Node>;

    static RandomForest train(const Matrix& x, const std::vector<int>& y, std::size_t n_classes,
                              const ForestParams& params, std::uint64_t seed);
    /// Assembles a forest from prebuilt trees.
    RandomForest(std::size_t n_features, std::size_t n_classes, std::vector<Tree> trees);

    std::size_t n_classes() const override { return k_; }
    std::size_t n_features() const override { return d_; }
    Matrix predict_proba(const Matrix& x) const override;

    const std::vector<Tree>& trees() const { return trees_; }

private:
    std::size_t d_;
    std::size_t k_;
    std::vector<Tree> trees_;
};

/// Dispatches on spec.kind. Throws std::invalid_argument on shape mismatch,
/// non-finite inputs or labels outside [0, n_classes).
std::unique_ptr<Classifier> train(const ModelSpec& spec, const Matrix& x, const std::vector<int>& y,
                                  std::size_t n_classes);

}  // namespace autofe::models
