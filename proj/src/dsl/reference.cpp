// Naive scalar interpreter: one tree walk per row. Shares only the validator
// and the Column/Table types with evaluate(); every operator is re-derived
// here from the language rules so the two paths can check each other.

#include "autofe/dsl/dsl.hpp"

#include <charconv>
#include <cmath>
#include <unordered_map>

namespace autofe::dsl {

namespace {

struct Scalar {
    bool valid = false;
    double num = 0.0;
    bool flag = false;
    std::string str;
};

Scalar missing() { return {}; }

Scalar of_number(double v) {
    Scalar s;
    if (std::isfinite(v)) {
        s.valid = true;
        s.num = v;
    }
    return s;
}

Scalar of_flag(bool v) {
    Scalar s;
    s.valid = true;
    s.flag = v;
    return s;
}

Scalar of_string(std::string v) {
    Scalar s;
    s.valid = true;
    s.str = std::move(v);
    return s;
}

bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }

// Decimal text -> finite double; whole string must be consumed.
std::optional<double> to_number(const std::string& raw) {
    std::size_t b = 0;
    std::size_t e = raw.size();
    while (b < e && (raw[b] == ' ' || raw[b] == '\t' || raw[b] == '\r' || raw[b] == '\n')) ++b;
    while (e > b && (raw[e - 1] == ' ' || raw[e - 1] == '\t' || raw[e - 1] == '\r' || raw[e - 1] == '\n')) --e;
    if (b < e && raw[b] == '+') ++b;
    if (b == e) return std::nullopt;
    double v = 0.0;
    auto res = std::from_chars(raw.data() + b, raw.data() + e, v);
    if (res.ec != std::errc() || res.ptr != raw.data() + e || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string number_label(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

class RowInterpreter {
public:
    RowInterpreter(const Table& t) : rows_(t.row_count()) {
        for (const auto& c : t.columns()) columns_.push_back(c);
    }

    Table run(const FeatureScript& script, const std::string& target) {
        for (const auto& st : script.statements) {
            if (const auto* f = std::get_if<FeatureDef>(&st)) {
                columns_.push_back(feature_column(*f));
            } else {
                const std::string& name = std::get<DropColumn>(st).name;
                std::vector<Column> kept;
                for (auto& c : columns_) {
                    if (c.name() != name) kept.push_back(std::move(c));
                }
                columns_ = std::move(kept);
            }
        }
        return Table(std::move(columns_), target);
    }

private:
    void number_nodes(const Expr& e) {
        for (const auto& a : e.args) number_nodes(a);
        order_[&e] = next_id_++;
    }

    Column feature_column(const FeatureDef& f) {
        order_.clear();
        next_id_ = 0;
        number_nodes(f.expr);
        failure_ = nullptr;

        const Dtype type = *f.expr.type;
        std::vector<Scalar> cells;
        cells.reserve(rows_);
        for (std::size_t r = 0; r < rows_; ++r) cells.push_back(eval(f.expr, r));
        if (failure_) {
            throw ExecError(ErrorKind::RuntimeError, "cannot convert missing value to integer", failure_->pos);
        }

        switch (type) {
            case Dtype::Number: {
                std::vector<std::optional<double>> v;
                for (auto& c : cells) v.push_back(c.valid ? std::optional<double>(c.num) : std::nullopt);
                return Column::numbers(f.name, std::move(v));
            }
            case Dtype::Boolean: {
                std::vector<std::uint8_t> v, m;
                for (auto& c : cells) {
                    v.push_back(c.valid && c.flag);
                    m.push_back(c.valid);
                }
                return Column::booleans(f.name, std::move(v), std::move(m));
            }
            case Dtype::Category: {
                std::vector<std::optional<std::string>> v;
                for (auto& c : cells) v.push_back(c.valid ? std::optional<std::string>(c.str) : std::nullopt);
                return Column::categories(f.name, std::move(v));
            }
            case Dtype::Text: {
                std::vector<std::optional<std::string>> v;
                for (auto& c : cells) v.push_back(c.valid ? std::optional<std::string>(c.str) : std::nullopt);
                return Column::texts(f.name, std::move(v));
            }
        }
        throw std::logic_error("bad dtype");
    }

    Scalar cell(const std::string& name, std::size_t r) const {
        for (const auto& c : columns_) {
            if (c.name() != name) continue;
            if (!c.valid(r)) return missing();
            switch (c.dtype()) {
                case Dtype::Number: return of_number(c.number(r));
                case Dtype::Boolean: return of_flag(c.boolean(r));
                default: return of_string(c.string_value(r));
            }
        }
        throw ExecError(ErrorKind::UnknownColumn, "unknown column \"" + name + "\"");
    }

    void record_failure(const Expr& e) {
        if (!failure_ || order_.at(&e) < order_.at(failure_)) failure_ = &e;
    }

    // All arguments are evaluated eagerly, including the unselected if_else
    // branch, matching the column-at-a-time semantics.
    Scalar eval(const Expr& e, std::size_t r) {
        switch (e.kind) {
            case Expr::Kind::Column: return cell(e.text, r);
            case Expr::Kind::Number: return of_number(e.number);
            case Expr::Kind::Text: return of_string(e.text);
            case Expr::Kind::Boolean: return of_flag(e.boolean);
            case Expr::Kind::List: return missing();
            case Expr::Kind::Unary: {
                Scalar a = eval(e.args[0], r);
                if (!a.valid) return missing();
                return e.unary_op == UnaryOp::Neg ? of_number(-a.num) : of_flag(!a.flag);
            }
            case Expr::Kind::Binary: return binary(e, r);
            case Expr::Kind::Call: return call(e, r);
        }
        return missing();
    }

    Scalar binary(const Expr& e, std::size_t r) {
        Scalar a = eval(e.args[0], r);
        Scalar b = eval(e.args[1], r);
        if (!a.valid || !b.valid) return missing();
        const Dtype lt = *e.args[0].type;
        switch (e.binary_op) {
            case BinaryOp::Add: return of_number(a.num + b.num);
            case BinaryOp::Sub: return of_number(a.num - b.num);
            case BinaryOp::Mul: return of_number(a.num * b.num);
            case BinaryOp::Div:
                if (b.num == 0.0) return missing();
                return of_number(a.num / b.num);
            case BinaryOp::Eq:
            case BinaryOp::Ne: {
                bool eq;
                if (lt == Dtype::Number) {
                    eq = a.num == b.num;
                } else if (lt == Dtype::Boolean) {
                    eq = a.flag == b.flag;
                } else {
                    eq = a.str == b.str;
                }
                return of_flag(e.binary_op == BinaryOp::Eq ? eq : !eq);
            }
            case BinaryOp::Lt: return of_flag(a.num < b.num);
            case BinaryOp::Le: return of_flag(a.num <= b.num);
            case BinaryOp::Gt: return of_flag(a.num > b.num);
            case BinaryOp::Ge: return of_flag(a.num >= b.num);
            case BinaryOp::And: return of_flag(a.flag && b.flag);
            case BinaryOp::Or: return of_flag(a.flag || b.flag);
        }
        return missing();
    }

    Scalar call(const Expr& e, std::size_t r) {
        const std::string& f = e.text;
        std::vector<Scalar> args;
        for (const auto& a : e.args) {
            args.push_back(a.kind == Expr::Kind::List ? missing() : eval(a, r));
        }

        if (f == "if_else") {
            if (!args[0].valid) return missing();
            return args[0].flag ? args[1] : args[2];
        }
        if (f == "fill_missing") {
            if (args[0].valid) return args[0];
            const Expr& lit = e.args[1];
            if (lit.kind == Expr::Kind::Number) return of_number(lit.number);
            if (lit.kind == Expr::Kind::Boolean) return of_flag(lit.boolean);
            return of_string(lit.text);
        }
        if (f == "is_missing") return of_flag(!args[0].valid);
        if (f == "as_int") {
            if (!args[0].valid) {
                record_failure(e);
                return missing();
            }
            return of_number(args[0].num < 0 ? std::ceil(args[0].num) : std::floor(args[0].num));
        }

        if (!args[0].valid) return missing();
        const Scalar& x = args[0];

        if (f == "bin") {
            const auto& edges = e.args[1].args;
            const auto& labels = e.args[2].args;
            for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
                if (x.num > edges[k].number && x.num <= edges[k + 1].number) return of_string(labels[k].text);
            }
            return missing();
        }
        if (f == "str_split") {
            const std::string& sep = e.args[1].text;
            std::vector<std::string> parts(1);
            for (std::size_t i = 0; i < x.str.size();) {
                if (x.str.compare(i, sep.size(), sep) == 0) {
                    parts.emplace_back();
                    i += sep.size();
                } else {
                    parts.back() += x.str[i];
                    ++i;
                }
            }
            long long idx = static_cast<long long>(e.args[2].number);
            long long n = static_cast<long long>(parts.size());
            if (idx < 0) idx = n + idx;
            if (idx < 0 || idx >= n) return missing();
            return of_string(parts[static_cast<std::size_t>(idx)]);
        }
        if (f == "str_char") {
            std::vector<std::string> chars;
            for (char c : x.str) {
                if (chars.empty() || (static_cast<unsigned char>(c) & 0xC0) != 0x80) {
                    chars.emplace_back(1, c);
                } else {
                    chars.back() += c;
                }
            }
            long long idx = static_cast<long long>(e.args[1].number);
            long long n = static_cast<long long>(chars.size());
            if (idx < 0) idx = n + idx;
            if (idx < 0 || idx >= n) return missing();
            return of_string(chars[static_cast<std::size_t>(idx)]);
        }
        if (f == "str_extract_int") {
            std::string digits;
            for (char c : x.str) {
                if (is_ascii_digit(c)) {
                    digits += c;
                } else if (!digits.empty()) {
                    break;
                }
            }
            if (digits.empty()) return missing();
            auto v = to_number(digits);
            return v ? of_number(*v) : missing();
        }
        if (f == "str_endswith") {
            const std::string& suf = e.args[1].text;
            if (suf.size() > x.str.size()) return of_flag(false);
            return of_flag(x.str.substr(x.str.size() - suf.size()) == suf);
        }
        if (f == "str_contains") {
            const std::string& needle = e.args[1].text;
            for (std::size_t i = 0; i + needle.size() <= x.str.size(); ++i) {
                if (x.str.compare(i, needle.size(), needle) == 0) return of_flag(true);
            }
            return of_flag(false);
        }
        if (f == "as_number") {
            if (*e.args[0].type == Dtype::Boolean) return of_number(x.flag ? 1.0 : 0.0);
            auto v = to_number(x.str);
            return v ? of_number(*v) : missing();
        }
        if (f == "as_category") {
            switch (*e.args[0].type) {
                case Dtype::Number: return of_string(number_label(x.num));
                case Dtype::Boolean: return of_string(x.flag ? "true" : "false");
                default: return of_string(x.str);
            }
        }
        if (f == "abs") return of_number(x.num <= 0 ? 0.0 - x.num : x.num);
        if (f == "log") return x.num > 0 ? of_number(std::log(x.num)) : missing();
        if (f == "min2" || f == "max2") {
            if (!args[1].valid) return missing();
            const double y = args[1].num;
            if (f == "min2") return of_number(y < x.num ? y : x.num);
            return of_number(x.num < y ? y : x.num);
        }
        throw ExecError(ErrorKind::TypeError, "unknown function '" + f + "'", e.pos);
    }

    std::size_t rows_;
    std::vector<Column> columns_;
    std::unordered_map<const Expr*, int> order_;
    int next_id_ = 0;
    const Expr* failure_ = nullptr;
};

}  // namespace

Table reference_evaluate(const FeatureScript& script, const Table& table) {
    FeatureScript typed = validate(script, table.schema());
    RowInterpreter interp(table);
    return interp.run(typed, table.target());
}

}  // namespace autofe::dsl
