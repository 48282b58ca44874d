#pragma once

// Random well-typed feature scripts over a given schema.

#include "autofe/dsl/dsl.hpp"
#include "autofe/random.hpp"

#include <string>
#include <utility>
#include <vector>

namespace autofe::testing {

class ScriptGenerator {
public:
    ScriptGenerator(Rng& rng, const Schema& schema) : rng_(rng), target_(schema.target) {
        for (const auto& c : schema.columns) {
            if (c.first != target_) columns_.push_back(c);
        }
    }

    dsl::FeatureScript script(std::size_t max_statements = 3) {
        dsl::FeatureScript s;
        const std::size_t n = 1 + rng_.index(max_statements);
        for (std::size_t i = 0; i < n; ++i) {
            if (rng_.index(6) == 0 && !columns_.empty()) {
                std::size_t k = rng_.index(columns_.size());
                dsl::DropColumn d;
                d.name = columns_[k].first;
                d.reason = rng_.index(2) ? "not needed" : "";
                columns_.erase(columns_.begin() + static_cast<std::ptrdiff_t>(k));
                s.statements.emplace_back(std::move(d));
                continue;
            }
            static const Dtype kinds[] = {Dtype::Number, Dtype::Boolean, Dtype::Category, Dtype::Text};
            Dtype t = kinds[rng_.index(4)];
            dsl::FeatureDef f;
            f.name = "f" + std::to_string(counter_++);
            f.usefulness = "generated";
            f.expr = expr(t, 1 + rng_.index(4));
            columns_.emplace_back(f.name, t);
            s.statements.emplace_back(std::move(f));
        }
        return s;
    }

    dsl::Expr expr(Dtype want, std::size_t depth) {
        using dsl::Expr;
        if (depth == 0 || rng_.index(4) == 0) return leaf(want);
        switch (want) {
            case Dtype::Number: return number(depth - 1);
            case Dtype::Boolean: return boolean(depth - 1);
            case Dtype::Category: return category(depth - 1);
            case Dtype::Text: return text(depth - 1);
        }
        return leaf(want);
    }

private:
    using Expr = dsl::Expr;

    std::vector<std::string> columns_of(Dtype t) const {
        std::vector<std::string> out;
        for (const auto& [n, d] : columns_) {
            if (d == t) out.push_back(n);
        }
        return out;
    }

    Expr leaf(Dtype want) {
        auto cols = columns_of(want);
        if (!cols.empty() && rng_.index(3) != 0) return Expr::column(cols[rng_.index(cols.size())]);
        if (want == Dtype::Category) {
            // A category needs a non-literal source.
            std::vector<std::string> all;
            for (const auto& c : columns_) all.push_back(c.first);
            if (!cols.empty()) return Expr::column(cols[rng_.index(cols.size())]);
            if (all.empty()) return Expr::call("as_category", {Expr::number_literal(1)});
            return Expr::call("as_category", {Expr::column(all[rng_.index(all.size())])});
        }
        return literal(want);
    }

    Expr literal(Dtype want) {
        switch (want) {
            case Dtype::Number: {
                static const double vals[] = {0.0, 1.0, -2.0, 0.5, 3.0, 10.0, -0.25, 1e300, 7.0};
                return Expr::number_literal(vals[rng_.index(std::size(vals))]);
            }
            case Dtype::Boolean: return Expr::bool_literal(rng_.index(2) == 1);
            default: {
                static const char* vals[] = {"red", "12", "F/1/S", "", "C3", "a b"};
                return Expr::text_literal(vals[rng_.index(std::size(vals))]);
            }
        }
    }

    Expr stringy(std::size_t depth) { return expr(rng_.index(2) ? Dtype::Text : Dtype::Category, depth); }

    Expr any(std::size_t depth) {
        static const Dtype kinds[] = {Dtype::Number, Dtype::Boolean, Dtype::Category, Dtype::Text};
        return expr(kinds[rng_.index(4)], depth);
    }

    Expr number(std::size_t d) {
        switch (rng_.index(11)) {
            case 0:
            case 1: {
                static const dsl::BinaryOp ops[] = {dsl::BinaryOp::Add, dsl::BinaryOp::Sub, dsl::BinaryOp::Mul,
                                                    dsl::BinaryOp::Div};
                return Expr::binary(ops[rng_.index(4)], expr(Dtype::Number, d), expr(Dtype::Number, d));
            }
            case 2: return Expr::unary(dsl::UnaryOp::Neg, expr(Dtype::Number, d));
            case 3: {
                static const char* fs[] = {"abs", "log"};
                return Expr::call(fs[rng_.index(2)], {expr(Dtype::Number, d)});
            }
            case 4: return Expr::call(rng_.index(2) ? "min2" : "max2", {expr(Dtype::Number, d), expr(Dtype::Number, d)});
            case 5: return Expr::call("str_extract_int", {stringy(d)});
            case 6: {
                Dtype t = rng_.index(3) == 0 ? Dtype::Boolean : (rng_.index(2) ? Dtype::Text : Dtype::Category);
                return Expr::call("as_number", {expr(t, d)});
            }
            case 7: return Expr::call("as_int", {expr(Dtype::Number, d)});
            case 8: return Expr::call("fill_missing", {expr(Dtype::Number, d), literal(Dtype::Number)});
            case 9: return Expr::call("if_else", {expr(Dtype::Boolean, d), expr(Dtype::Number, d), expr(Dtype::Number, d)});
            default: return leaf(Dtype::Number);
        }
    }

    Expr boolean(std::size_t d) {
        switch (rng_.index(9)) {
            case 0: {
                static const dsl::BinaryOp ops[] = {dsl::BinaryOp::Lt, dsl::BinaryOp::Le, dsl::BinaryOp::Gt,
                                                    dsl::BinaryOp::Ge, dsl::BinaryOp::Eq, dsl::BinaryOp::Ne};
                return Expr::binary(ops[rng_.index(6)], expr(Dtype::Number, d), expr(Dtype::Number, d));
            }
            case 1:
                return Expr::binary(rng_.index(2) ? dsl::BinaryOp::Eq : dsl::BinaryOp::Ne, stringy(d), stringy(d));
            case 2:
                return Expr::binary(rng_.index(2) ? dsl::BinaryOp::And : dsl::BinaryOp::Or, expr(Dtype::Boolean, d),
                                    expr(Dtype::Boolean, d));
            case 3: return Expr::unary(dsl::UnaryOp::Not, expr(Dtype::Boolean, d));
            case 4: return Expr::call("is_missing", {any(d)});
            case 5: {
                static const char* needles[] = {"S", "/", "1", "", "re"};
                return Expr::call(rng_.index(2) ? "str_endswith" : "str_contains",
                                  {stringy(d), Expr::text_literal(needles[rng_.index(std::size(needles))])});
            }
            case 6: return Expr::call("fill_missing", {expr(Dtype::Boolean, d), literal(Dtype::Boolean)});
            case 7:
                return Expr::binary(rng_.index(2) ? dsl::BinaryOp::Eq : dsl::BinaryOp::Ne, expr(Dtype::Boolean, d),
                                    expr(Dtype::Boolean, d));
            default: return leaf(Dtype::Boolean);
        }
    }

    Expr category(std::size_t d) {
        switch (rng_.index(5)) {
            case 0: return Expr::call("as_category", {any(d)});
            case 1: {
                std::vector<Expr> edges, labels;
                double e = -5.0 + static_cast<double>(rng_.index(5));
                const std::size_t k = 1 + rng_.index(4);
                for (std::size_t i = 0; i <= k; ++i) {
                    edges.push_back(Expr::number_literal(e));
                    e += 0.5 + static_cast<double>(rng_.index(4));
                    if (i < k) labels.push_back(Expr::text_literal("b" + std::to_string(i)));
                }
                return Expr::call("bin", {expr(Dtype::Number, d), Expr::list(std::move(edges)), Expr::list(std::move(labels))});
            }
            case 2: {
                // Mixed Text/Category branches unify to Category.
                Dtype a = Dtype::Category;
                Dtype b = rng_.index(2) ? Dtype::Text : Dtype::Category;
                if (rng_.index(2)) std::swap(a, b);
                return Expr::call("if_else", {expr(Dtype::Boolean, d), expr(a, d), expr(b, d)});
            }
            case 3: return Expr::call("fill_missing", {expr(Dtype::Category, d), literal(Dtype::Text)});
            default: return leaf(Dtype::Category);
        }
    }

    Expr text(std::size_t d) {
        switch (rng_.index(5)) {
            case 0: {
                static const char* seps[] = {"/", " ", "1", "//"};
                const double idx = static_cast<double>(static_cast<long long>(rng_.index(7)) - 3);
                return Expr::call("str_split", {stringy(d), Expr::text_literal(seps[rng_.index(std::size(seps))]),
                                                Expr::number_literal(idx)});
            }
            case 1: {
                const double idx = static_cast<double>(static_cast<long long>(rng_.index(7)) - 3);
                return Expr::call("str_char", {stringy(d), Expr::number_literal(idx)});
            }
            case 2: return Expr::call("if_else", {expr(Dtype::Boolean, d), expr(Dtype::Text, d), expr(Dtype::Text, d)});
            case 3: return Expr::call("fill_missing", {expr(Dtype::Text, d), literal(Dtype::Text)});
            default: return leaf(Dtype::Text);
        }
    }

    Rng& rng_;
    std::string target_;
    std::vector<std::pair<std::string, Dtype>> columns_;
    int counter_ = 0;
};

}  // namespace autofe::testing
