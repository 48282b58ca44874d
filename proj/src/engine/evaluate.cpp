#include "autofe/engine.hpp"
#include "autofe/models/preprocess.hpp"

#include <future>
#include <stdexcept>

namespace autofe::engine {

models::EvalMetrics mean_metrics(const std::vector<models::EvalMetrics>& m) {
    models::EvalMetrics out;
    if (m.empty()) return out;
    for (const auto& e : m) {
        out.roc_auc += e.roc_auc;
        out.accuracy += e.accuracy;
    }
    out.roc_auc /= static_cast<double>(m.size());
    out.accuracy /= static_cast<double>(m.size());
    return out;
}

EvalOutcome EvalOutcome::from_splits(std::vector<models::EvalMetrics> before, std::vector<models::EvalMetrics> after) {
    if (before.size() != after.size() || before.empty()) {
        throw std::invalid_argument("before/after split metrics must be non-empty and of equal length");
    }
    EvalOutcome o;
    double d_auc = 0.0, d_acc = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i) {
        d_auc += after[i].roc_auc - before[i].roc_auc;
        d_acc += after[i].accuracy - before[i].accuracy;
    }
    const double n = static_cast<double>(before.size());
    o.before = std::move(before);
    o.after = std::move(after);
    o.mean_delta_auc = d_auc / n;
    o.mean_delta_acc = d_acc / n;
    o.decision_score = (o.mean_delta_auc + o.mean_delta_acc) / 2.0;
    o.recommended = o.decision_score > 0.0;
    return o;
}

models::EvalMetrics EvalOutcome::mean_before() const { return mean_metrics(before); }
models::EvalMetrics EvalOutcome::mean_after() const { return mean_metrics(after); }

namespace {

models::EvalMetrics score_split(const Table& table, const EncodedTarget& target, const Split& split,
                                const models::ModelSpec& spec) {
    const Table train = table.take(split.train);
    const Table valid = table.take(split.valid);
    const auto pre = models::Preprocessor::fit(train, spec.encoding());
    std::vector<int> y_train, y_valid;
    for (auto r : split.train) y_train.push_back(target.labels[r]);
    for (auto r : split.valid) y_valid.push_back(target.labels[r]);
    const auto model = models::train(spec, pre.transform(train), y_train, target.classes.size());
    return models::evaluate_metrics(model->predict_proba(pre.transform(valid)), y_valid);
}

}  // namespace

std::vector<models::EvalMetrics> evaluate_table(const Table& table, const SplitSet& splits,
                                                const models::ModelSpec& spec) {
    const EncodedTarget target = encode_target(table);
    std::vector<std::future<models::EvalMetrics>> jobs;
    for (const auto& split : splits.splits) {
        jobs.push_back(std::async(std::launch::async, score_split, std::cref(table), std::cref(target),
                                  std::cref(split), std::cref(spec)));
    }
    std::vector<models::EvalMetrics> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

EvalOutcome evaluate_candidate(const Table& base, const dsl::FeatureScript& script, const SplitSet& splits,
                               const models::ModelSpec& spec) {
    // The script runs once on every row; rows are split afterwards so P and
    // P' share the same partitions.
    const Table transformed = dsl::evaluate(script, base);
    return EvalOutcome::from_splits(evaluate_table(base, splits, spec), evaluate_table(transformed, splits, spec));
}

EvalOutcome evaluate_candidate(const Table& base, const dsl::FeatureScript& script, const SplitPlan& plan,
                               const models::ModelSpec& spec) {
    return evaluate_candidate(base, script, make_splits(base, plan), spec);
}

}  // namespace autofe::engine
