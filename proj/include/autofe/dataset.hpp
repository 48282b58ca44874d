#pragma once

#include "autofe/table.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace autofe {

struct ColumnSummary {
    std::string name;
    Dtype dtype = Dtype::Number;
    /// True for Number columns whose present values are all integral.
    bool integral = false;
    double missing_fraction = 0.0;
    /// Display renderings of the sampled rows; missing cells read "NaN".
    std::vector<std::string> samples;
};

/// Per-column dtype, missing fraction and `n_samples` aligned sample values.
/// The sampled rows are drawn without replacement from `rng_seed` and shared
/// by every column.
std::vector<ColumnSummary> summarize(const Table& table, std::size_t n_samples, std::uint64_t rng_seed);

/// Short dtype label used in prompts: int/float/bool/category/string.
std::string display_dtype(const ColumnSummary& summary);

struct SplitPlan {
    std::uint64_t seed = 0;
    std::size_t n_splits = 10;
    double valid_fraction = 0.3;
    bool stratified = true;
};

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> valid;
};

struct SplitSet {
    std::vector<Split> splits;
    /// Set when stratification was requested but some class had fewer rows
    /// than n_splits.
    bool stratification_downgraded = false;
};

/// Split i is drawn from mix_seed(plan.seed, i). Index lists are sorted.
SplitSet make_splits(const std::vector<int>& labels, const SplitPlan& plan);
SplitSet make_splits(const Table& table, const SplitPlan& plan);

/// All legal end-of-game tic-tac-toe boards (x moves first): nine Category
/// columns over {x, o, b} and a Category target "Class" with labels
/// positive (x has a line) / negative.
Table gen_tictactoe();

/// Names of the nine board columns, row-major.
const std::vector<std::string>& tictactoe_squares();

}  // namespace autofe
