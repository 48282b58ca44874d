#include "autofe/models/classifier.hpp"

#include "autofe/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace autofe::models {

namespace {

double gini(const std::vector<double>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double s = 0.0;
    for (double c : counts) s += c * c;
    return 1.0 - s / (total * total);
}

int majority(const std::vector<double>& counts) {
    int best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
        if (counts[c] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    }
    return best;
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, const std::vector<int>& y, std::size_t k, const ForestParams& p, Rng& rng)
        : x_(x), y_(y), k_(k), p_(p), rng_(rng) {}

    RandomForest::Tree build(std::vector<std::size_t> rows) {
        tree_.clear();
        grow(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    int grow(std::vector<std::size_t> rows, int depth) {
        const int id = static_cast<int>(tree_.size());
        tree_.emplace_back();
        std::vector<double> counts(k_, 0.0);
        for (auto r : rows) counts[static_cast<std::size_t>(y_[r])] += 1.0;
        tree_[id].label = majority(counts);

        const auto n = static_cast<double>(rows.size());
        const bool pure = counts[static_cast<std::size_t>(tree_[id].label)] == n;
        if (pure || depth >= p_.max_depth || rows.size() < 2 * static_cast<std::size_t>(p_.min_leaf)) return id;

        SplitChoice best = choose(rows, counts);
        if (!best.found) return id;

        std::vector<std::size_t> left, right;
        for (auto r : rows) (x_(r, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        tree_[id].feature = best.feature;
        tree_[id].threshold = best.threshold;
        const int l = grow(std::move(left), depth + 1);
        tree_[id].left = l;
        const int r = grow(std::move(right), depth + 1);
        tree_[id].right = r;
        return id;
    }

    // sqrt(d) random features; if none of them admits a split, keep drawing
    // from the rest until one does.
    SplitChoice choose(const std::vector<std::size_t>& rows, const std::vector<double>& counts) {
        const std::size_t d = x_.cols();
        std::vector<std::size_t> order(d);
        std::iota(order.begin(), order.end(), 0);
        rng_.shuffle(order);
        const std::size_t mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));

        SplitChoice best;
        for (std::size_t i = 0; i < d; ++i) {
            if (i >= mtry && best.found) break;
            consider(order[i], rows, counts, best);
        }
        return best;
    }

    void consider(std::size_t f, const std::vector<std::size_t>& rows, const std::vector<double>& counts,
                  SplitChoice& best) {
        std::vector<std::pair<double, int>> v;
        v.reserve(rows.size());
        for (auto r : rows) v.emplace_back(x_(r, f), y_[r]);
        std::sort(v.begin(), v.end());

        const double total = static_cast<double>(v.size());
        const auto min_leaf = static_cast<std::size_t>(p_.min_leaf);
        std::vector<double> left(k_, 0.0);
        std::vector<double> right = counts;
        for (std::size_t i = 0; i + 1 < v.size(); ++i) {
            left[static_cast<std::size_t>(v[i].second)] += 1.0;
            right[static_cast<std::size_t>(v[i].second)] -= 1.0;
            if (v[i].first == v[i + 1].first) continue;
            const std::size_t nl = i + 1;
            if (nl < min_leaf || v.size() - nl < min_leaf) continue;
            const double wl = static_cast<double>(nl);
            const double wr = total - wl;
            const double impurity = (wl * gini(left, wl) + wr * gini(right, wr)) / total;
            if (!best.found || impurity < best.impurity) {
                double thr = v[i].first + (v[i + 1].first - v[i].first) / 2.0;
                if (!(thr < v[i + 1].first)) thr = v[i].first;
                best = {true, static_cast<int>(f), thr, impurity};
            }
        }
    }

    const Matrix& x_;
    const std::vector<int>& y_;
    std::size_t k_;
    const ForestParams& p_;
    Rng& rng_;
    RandomForest::Tree tree_;
};

}  // namespace

RandomForest::RandomForest(std::size_t n_features, std::size_t n_classes, std::vector<Tree> trees)
    : d_(n_features), k_(n_classes), trees_(std::move(trees)) {
    if (trees_.empty()) throw std::invalid_argument("a forest needs at least one tree");
}

RandomForest RandomForest::train(const Matrix& x, const std::vector<int>& y, std::size_t n_classes,
                                 const ForestParams& params, std::uint64_t seed) {
    if (params.n_trees < 1 || params.max_depth < 0 || params.min_leaf < 1) {
        throw std::invalid_argument("invalid forest parameters");
    }
    const std::size_t n = x.rows();
    std::vector<Tree> trees;
    trees.reserve(static_cast<std::size_t>(params.n_trees));
    for (int t = 0; t < params.n_trees; ++t) {
        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) s = rng.index(n);
        TreeBuilder builder(x, y, n_classes, params, rng);
        trees.push_back(builder.build(std::move(sample)));
    }
    return RandomForest(x.cols(), n_classes, std::move(trees));
}

Matrix RandomForest::predict_proba(const Matrix& x) const {
    if (x.cols() != d_) throw std::invalid_argument("input width does not match the trained model");
    Matrix out(x.rows(), k_);
    const auto n_trees = static_cast<double>(trees_.size());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (const Tree& tree : trees_) {
            int node = 0;
            while (tree[static_cast<std::size_t>(node)].feature >= 0) {
                const Node& nd = tree[static_cast<std::size_t>(node)];
                node = x(i, static_cast<std::size_t>(nd.feature)) <= nd.threshold ? nd.left : nd.right;
            }
            out(i, static_cast<std::size_t>(tree[static_cast<std::size_t>(node)].label)) += 1.0;
        }
        for (std::size_t c = 0; c < k_; ++c) out(i, c) /= n_trees;
    }
    return out;
}

}  // namespace autofe::models
