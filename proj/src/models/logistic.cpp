#include "autofe/models/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace autofe::models {

LogisticRegression::LogisticRegression(std::size_t n_features, std::size_t n_classes)
    : d_(n_features), k_(n_classes), w_((n_features + 1) * n_classes, 0.0) {
    if (n_classes == 0) throw std::invalid_argument("logistic regression needs at least one class");
}

void LogisticRegression::set_parameters(std::vector<double> w) {
    if (w.size() != w_.size()) throw std::invalid_argument("parameter vector has the wrong size");
    w_ = std::move(w);
}

namespace {

// Logits for one row into z (size k).
void logits(std::span<const double> x, const std::vector<double>& w, std::size_t k, std::vector<double>& z) {
    const std::size_t d = x.size();
    for (std::size_t c = 0; c < k; ++c) z[c] = w[d * k + c];
    for (std::size_t j = 0; j < d; ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        const double* wj = &w[j * k];
        for (std::size_t c = 0; c < k; ++c) z[c] += xj * wj[c];
    }
}

// In-place softmax; returns log-sum-exp.
double softmax(std::vector<double>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double& v : z) {
        v = std::exp(v - m);
        s += v;
    }
    for (double& v : z) v /= s;
    return m + std::log(s);
}

}  // namespace

double LogisticRegression::loss_and_gradient(const Matrix& x, const std::vector<int>& y, std::size_t k,
                                             const std::vector<double>& w, double l2, std::vector<double>* grad) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (grad) grad->assign(w.size(), 0.0);
    std::vector<double> z(k);
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        auto row = x.row(i);
        logits(row, w, k, z);
        const double zy = z[static_cast<std::size_t>(y[i])];
        const double lse = softmax(z);
        loss += lse - zy;
        if (!grad) continue;
        z[static_cast<std::size_t>(y[i])] -= 1.0;
        auto& g = *grad;
        for (std::size_t j = 0; j < d; ++j) {
            const double xj = row[j];
            if (xj == 0.0) continue;
            double* gj = &g[j * k];
            for (std::size_t c = 0; c < k; ++c) gj[c] += xj * z[c];
        }
        for (std::size_t c = 0; c < k; ++c) g[d * k + c] += z[c];
    }
    const double inv_n = n ? 1.0 / static_cast<double>(n) : 0.0;
    loss *= inv_n;
    double penalty = 0.0;
    for (std::size_t i = 0; i < d * k; ++i) penalty += w[i] * w[i];
    loss += 0.5 * l2 * penalty;
    if (grad) {
        auto& g = *grad;
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= inv_n;
        for (std::size_t i = 0; i < d * k; ++i) g[i] += l2 * w[i];
    }
    return loss;
}

LogisticRegression LogisticRegression::train(const Matrix& x, const std::vector<int>& y, std::size_t n_classes,
                                             const LogisticParams& params) {
    LogisticRegression model(x.cols(), n_classes);
    std::vector<double>& w = model.w_;
    std::vector<double> grad;
    std::vector<double> trial(w.size());
    double loss = loss_and_gradient(x, y, n_classes, w, params.l2, &grad);
    model.loss_history_.push_back(loss);

    double step = 1.0;
    for (int it = 0; it < params.max_iterations; ++it) {
        double gmax = 0.0;
        double gnorm2 = 0.0;
        for (double g : grad) {
            gmax = std::max(gmax, std::fabs(g));
            gnorm2 += g * g;
        }
        if (gmax < params.tolerance) break;

        // Armijo backtracking; the loss never increases.
        bool moved = false;
        double trial_loss = loss;
        while (step > 1e-12) {
            for (std::size_t i = 0; i < w.size(); ++i) trial[i] = w[i] - step * grad[i];
            trial_loss = loss_and_gradient(x, y, n_classes, trial, params.l2, nullptr);
            if (trial_loss <= loss - 1e-4 * step * gnorm2) {
                moved = true;
                break;
            }
            step *= 0.5;
        }
        if (!moved) break;
        w.swap(trial);
        loss = loss_and_gradient(x, y, n_classes, w, params.l2, &grad);
        model.loss_history_.push_back(loss);
        step = std::min(step * 2.0, 64.0);
    }
    return model;
}

Matrix LogisticRegression::predict_proba(const Matrix& x) const {
    if (x.cols() != d_) throw std::invalid_argument("input width does not match the trained model");
    Matrix out(x.rows(), k_);
    std::vector<double> z(k_);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        logits(x.row(i), w_, k_, z);
        softmax(z);
        for (std::size_t c = 0; c < k_; ++c) out(i, c) = z[c];
    }
    return out;
}

}  // namespace autofe::models
