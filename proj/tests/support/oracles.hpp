#pragma once

// Slow, obviously-correct reference computations.

#include "autofe/models/classifier.hpp"
#include "autofe/models/matrix.hpp"
#include "autofe/random.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

namespace autofe::testing {

/// A(pos|neg) by counting every (pos, neg) row pair on score column `pos`.
inline double pair_count(const models::Matrix& s, const std::vector<int>& y, int pos, int neg) {
    double good = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] != pos) continue;
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (y[j] != neg) continue;
            const double a = s(i, static_cast<std::size_t>(pos));
            const double b = s(j, static_cast<std::size_t>(pos));
            good += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
            pairs += 1.0;
        }
    }
    return good / pairs;
}

/// Binary: A(hi|lo). Multiclass: mean over pairs of the two-direction average.
inline double pair_count_auc(const models::Matrix& s, const std::vector<int>& y) {
    std::set<int> present(y.begin(), y.end());
    std::vector<int> c(present.begin(), present.end());
    if (c.size() == 2) return pair_count(s, y, c[1], c[0]);
    double total = 0.0;
    int pairs = 0;
    for (std::size_t a = 0; a < c.size(); ++a) {
        for (std::size_t b = a + 1; b < c.size(); ++b) {
            total += 0.5 * (pair_count(s, y, c[a], c[b]) + pair_count(s, y, c[b], c[a]));
            ++pairs;
        }
    }
    return total / pairs;
}

/// Largest relative error between the analytic logistic-regression gradient
/// and central differences (h = 1e-5) over `instances` random problems.
/// Components whose magnitude is below 1e-6 are compared on that floor.
inline double worst_gradient_error(Rng& rng, int instances) {
    double worst = 0.0;
    for (int t = 0; t < instances; ++t) {
        const std::size_t n = 3 + rng.index(20);
        const std::size_t d = 1 + rng.index(5);
        const std::size_t k = 2 + rng.index(3);
        models::Matrix x(n, d);
        for (auto& v : x.data()) v = rng.uniform(-2.0, 2.0);
        std::vector<int> y(n);
        for (auto& v : y) v = static_cast<int>(rng.index(k));
        std::vector<double> w((d + 1) * k);
        for (auto& v : w) v = rng.uniform(-1.0, 1.0);
        const double l2 = rng.index(2) ? 1e-3 : rng.uniform(0.0, 0.5);

        std::vector<double> grad;
        models::LogisticRegression::loss_and_gradient(x, y, k, w, l2, &grad);
        const double h = 1e-5;
        for (std::size_t i = 0; i < w.size(); ++i) {
            auto wp = w, wm = w;
            wp[i] += h;
            wm[i] -= h;
            const double fp = models::LogisticRegression::loss_and_gradient(x, y, k, wp, l2, nullptr);
            const double fm = models::LogisticRegression::loss_and_gradient(x, y, k, wm, l2, nullptr);
            const double numeric = (fp - fm) / (2.0 * h);
            const double denom = std::max({std::fabs(numeric), std::fabs(grad[i]), 1e-6});
            worst = std::max(worst, std::fabs(numeric - grad[i]) / denom);
        }
    }
    return worst;
}

}  // namespace autofe::testing
