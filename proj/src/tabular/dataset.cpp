#include "autofe/dataset.hpp"

#include "autofe/random.hpp"
#include "autofe/text_format.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>

namespace autofe {

std::vector<ColumnSummary> summarize(const Table& table, std::size_t n_samples, std::uint64_t rng_seed) {
    const std::size_t n = table.row_count();
    n_samples = std::min(n_samples, n);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(rng_seed);
    for (std::size_t i = 0; i < n_samples; ++i) {
        std::swap(order[i], order[i + rng.index(n - i)]);
    }
    order.resize(n_samples);

    std::vector<ColumnSummary> out;
    out.reserve(table.column_count());
    for (const Column& col : table.columns()) {
        ColumnSummary s;
        s.name = col.name();
        s.dtype = col.dtype();
        s.missing_fraction = n == 0 ? 0.0 : static_cast<double>(col.missing_count()) / static_cast<double>(n);
        if (col.dtype() == Dtype::Number) {
            bool any = false;
            bool integral = true;
            for (std::size_t r = 0; r < n; ++r) {
                if (!col.valid(r)) continue;
                any = true;
                if (col.number(r) != std::trunc(col.number(r))) {
                    integral = false;
                    break;
                }
            }
            s.integral = any && integral;
        }
        for (std::size_t row : order) {
            if (!col.valid(row)) {
                s.samples.emplace_back("NaN");
            } else if (col.dtype() == Dtype::Number) {
                s.samples.push_back(format_number_display(col.number(row)));
            } else {
                s.samples.push_back(col.render(row));
            }
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::string display_dtype(const ColumnSummary& summary) {
    switch (summary.dtype) {
        case Dtype::Number: return summary.integral ? "int" : "float";
        case Dtype::Boolean: return "bool";
        case Dtype::Category: return "category";
        case Dtype::Text: return "string";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// Splits

namespace {

Split finish(std::vector<std::size_t> valid, std::size_t n) {
    std::sort(valid.begin(), valid.end());
    Split s;
    std::vector<std::uint8_t> is_valid(n, 0);
    for (auto v : valid) is_valid[v] = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_valid[i]) s.train.push_back(i);
    }
    s.valid = std::move(valid);
    return s;
}

}  // namespace

SplitSet make_splits(const std::vector<int>& labels, const SplitPlan& plan) {
    const std::size_t n = labels.size();
    if (plan.n_splits < 1) throw DataError("split plan needs at least one split");
    if (!(plan.valid_fraction > 0.0 && plan.valid_fraction < 1.0)) {
        throw DataError("valid_fraction must lie in (0, 1)");
    }
    if (n < 2) throw DataError("need at least two rows to split");
    const std::size_t n_valid = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::llround(plan.valid_fraction * static_cast<double>(n))), 1, n - 1);

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);

    SplitSet out;
    bool stratified = plan.stratified;
    if (stratified) {
        for (const auto& [_, rows] : by_class) {
            if (rows.size() < plan.n_splits) {
                stratified = false;
                out.stratification_downgraded = true;
            }
        }
    }

    // Largest-remainder quotas keep every class within one row of its
    // proportional share while hitting n_valid exactly.
    std::vector<std::size_t> quota;
    if (stratified) {
        std::vector<std::pair<double, std::size_t>> remainders;
        std::size_t assigned = 0;
        std::size_t k = 0;
        for (const auto& [_, rows] : by_class) {
            const double exact =
                static_cast<double>(rows.size()) * static_cast<double>(n_valid) / static_cast<double>(n);
            auto base = static_cast<std::size_t>(std::floor(exact));
            quota.push_back(base);
            assigned += base;
            remainders.emplace_back(exact - static_cast<double>(base), k++);
        }
        std::stable_sort(remainders.begin(), remainders.end(),
                         [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t i = 0; assigned < n_valid && i < remainders.size(); ++i) {
            ++quota[remainders[i].second];
            ++assigned;
        }
    }

    for (std::size_t s = 0; s < plan.n_splits; ++s) {
        Rng rng(mix_seed(plan.seed, s));
        std::vector<std::size_t> valid;
        if (stratified) {
            std::size_t k = 0;
            for (const auto& [_, rows] : by_class) {
                std::vector<std::size_t> shuffled = rows;
                rng.shuffle(shuffled);
                valid.insert(valid.end(), shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(quota[k++]));
            }
        } else {
            std::vector<std::size_t> all(n);
            for (std::size_t i = 0; i < n; ++i) all[i] = i;
            rng.shuffle(all);
            valid.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_valid));
        }
        out.splits.push_back(finish(std::move(valid), n));
    }
    return out;
}

SplitSet make_splits(const Table& table, const SplitPlan& plan) {
    return make_splits(encode_target(table).labels, plan);
}

// ---------------------------------------------------------------------------
// Tic-tac-toe endgame boards

const std::vector<std::string>& tictactoe_squares() {
    static const std::vector<std::string> names = {
        "top-left-square",    "top-middle-square",    "top-right-square",
        "middle-left-square", "middle-middle-square", "middle-right-square",
        "bottom-left-square", "bottom-middle-square", "bottom-right-square"};
    return names;
}

namespace {

using Board = std::array<char, 9>;

constexpr int kLines[8][3] = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6},
                              {1, 4, 7}, {2, 5, 8}, {0, 4, 8}, {2, 4, 6}};

bool has_line(const Board& b, char who) {
    for (const auto& l : kLines) {
        if (b[l[0]] == who && b[l[1]] == who && b[l[2]] == who) return true;
    }
    return false;
}

void play(Board& board, char to_move, int filled, std::set<Board>& terminal) {
    const char last = to_move == 'x' ? 'o' : 'x';
    if ((filled > 0 && has_line(board, last)) || filled == 9) {
        terminal.insert(board);
        return;
    }
    for (int cell = 0; cell < 9; ++cell) {
        if (board[cell] != 'b') continue;
        board[cell] = to_move;
        play(board, last, filled + 1, terminal);
        board[cell] = 'b';
    }
}

}  // namespace

Table gen_tictactoe() {
    Board empty;
    empty.fill('b');
    std::set<Board> terminal;
    play(empty, 'x', 0, terminal);

    const auto& names = tictactoe_squares();
    std::vector<std::vector<std::string>> cells(9);
    std::vector<std::string> cls;
    for (const Board& b : terminal) {
        for (int i = 0; i < 9; ++i) cells[i].emplace_back(1, b[i]);
        cls.emplace_back(has_line(b, 'x') ? "positive" : "negative");
    }
    std::vector<Column> columns;
    const std::size_t n = terminal.size();
    for (int i = 0; i < 9; ++i) {
        columns.push_back(Column::categories(names[i], std::move(cells[i]), Column::Mask(n, 1), {"x", "o", "b"}));
    }
    columns.push_back(Column::categories("Class", std::move(cls), Column::Mask(n, 1), {"positive", "negative"}));
    return Table(std::move(columns), "Class");
}

}  // namespace autofe
