#include "autofe/dsl/dsl.hpp"

#include "autofe/text_format.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace autofe::dsl {

namespace {

// One evaluated expression over all rows. Category and Text values both live
// in `str`; `dictionary` preserves declared bin() label order.
struct Vec {
    Dtype type = Dtype::Number;
    std::vector<double> num;
    std::vector<std::uint8_t> flag;
    std::vector<std::string> str;
    std::vector<std::uint8_t> valid;
    std::vector<std::string> dictionary;
};

Vec make(Dtype t, std::size_t n) {
    Vec v;
    v.type = t;
    v.valid.assign(n, 0);
    switch (t) {
        case Dtype::Number: v.num.assign(n, 0.0); break;
        case Dtype::Boolean: v.flag.assign(n, 0); break;
        case Dtype::Category:
        case Dtype::Text: v.str.assign(n, std::string()); break;
    }
    return v;
}

// Numbers must stay finite; anything else becomes missing.
void sanitize(Vec& v) {
    for (std::size_t i = 0; i < v.num.size(); ++i) {
        if (v.valid[i] && !std::isfinite(v.num[i])) {
            v.valid[i] = 0;
            v.num[i] = 0.0;
        }
    }
}

Vec from_column(const Column& c) {
    const std::size_t n = c.size();
    Vec v = make(c.dtype(), n);
    v.valid = c.validity();
    for (std::size_t i = 0; i < n; ++i) {
        if (!c.valid(i)) continue;
        switch (c.dtype()) {
            case Dtype::Number: v.num[i] = c.number(i); break;
            case Dtype::Boolean: v.flag[i] = c.boolean(i) ? 1 : 0; break;
            case Dtype::Category:
            case Dtype::Text: v.str[i] = c.string_value(i); break;
        }
    }
    return v;
}

Column to_column(const std::string& name, Vec v) {
    switch (v.type) {
        case Dtype::Number: return Column::numbers(name, std::move(v.num), std::move(v.valid));
        case Dtype::Boolean: return Column::booleans(name, std::move(v.flag), std::move(v.valid));
        case Dtype::Category:
            return Column::categories(name, std::move(v.str), std::move(v.valid), std::move(v.dictionary));
        case Dtype::Text: return Column::texts(name, std::move(v.str), std::move(v.valid));
    }
    throw std::logic_error("bad dtype");
}

// Code-point start offsets of a UTF-8 string.
std::vector<std::size_t> codepoint_starts(const std::string& s) {
    std::vector<std::size_t> starts;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) starts.push_back(i);
    }
    return starts;
}

std::vector<std::string> split_all(const std::string& s, const std::string& sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        auto hit = s.find(sep, start);
        if (hit == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, hit - start));
        start = hit + sep.size();
    }
}

std::optional<std::size_t> resolve_index(long long idx, std::size_t size) {
    long long n = static_cast<long long>(size);
    if (idx < 0) idx += n;
    if (idx < 0 || idx >= n) return std::nullopt;
    return static_cast<std::size_t>(idx);
}

std::string category_label(const Vec& v, std::size_t i) {
    switch (v.type) {
        case Dtype::Number: return format_number_exact(v.num[i]);
        case Dtype::Boolean: return v.flag[i] ? "true" : "false";
        default: return v.str[i];
    }
}

class VectorInterpreter {
public:
    explicit VectorInterpreter(const Table& t) : rows_(t.row_count()) {
        for (const auto& c : t.columns()) columns_.push_back(c);
    }

    Table run(const FeatureScript& script, const std::string& target) {
        for (const auto& st : script.statements) {
            if (const auto* f = std::get_if<FeatureDef>(&st)) {
                Vec v = eval(f->expr);
                columns_.push_back(to_column(f->name, std::move(v)));
            } else {
                const auto& d = std::get<DropColumn>(st);
                std::erase_if(columns_, [&](const Column& c) { return c.name() == d.name; });
            }
        }
        return Table(std::move(columns_), target);
    }

private:
    const Column& lookup(const std::string& name) const {
        for (const auto& c : columns_) {
            if (c.name() == name) return c;
        }
        throw ExecError(ErrorKind::UnknownColumn, "unknown column \"" + name + "\"");
    }

    Vec broadcast(const Expr& e) const {
        Vec v = make(*e.type, rows_);
        std::fill(v.valid.begin(), v.valid.end(), 1);
        switch (e.kind) {
            case Expr::Kind::Number: std::fill(v.num.begin(), v.num.end(), e.number); break;
            case Expr::Kind::Boolean: std::fill(v.flag.begin(), v.flag.end(), e.boolean ? 1 : 0); break;
            default: std::fill(v.str.begin(), v.str.end(), e.text); break;
        }
        return v;
    }

    Vec eval(const Expr& e) {
        switch (e.kind) {
            case Expr::Kind::Column: return from_column(lookup(e.text));
            case Expr::Kind::Number:
            case Expr::Kind::Text:
            case Expr::Kind::Boolean: return broadcast(e);
            case Expr::Kind::Unary: return eval_unary(e);
            case Expr::Kind::Binary: return eval_binary(e);
            case Expr::Kind::Call: return eval_call(e);
            case Expr::Kind::List: break;
        }
        throw ExecError(ErrorKind::TypeError, "list literal outside bin()", e.pos);
    }

    Vec eval_unary(const Expr& e) {
        Vec a = eval(e.args[0]);
        if (e.unary_op == UnaryOp::Neg) {
            for (std::size_t i = 0; i < rows_; ++i) a.num[i] = -a.num[i];
        } else {
            for (std::size_t i = 0; i < rows_; ++i) a.flag[i] = a.flag[i] ? 0 : 1;
        }
        return a;
    }

    Vec eval_binary(const Expr& e) {
        Vec a = eval(e.args[0]);
        Vec b = eval(e.args[1]);
        Vec r = make(*e.type, rows_);
        for (std::size_t i = 0; i < rows_; ++i) r.valid[i] = a.valid[i] && b.valid[i];

        switch (e.binary_op) {
            case BinaryOp::Add:
                for (std::size_t i = 0; i < rows_; ++i) r.num[i] = a.num[i] + b.num[i];
                break;
            case BinaryOp::Sub:
                for (std::size_t i = 0; i < rows_; ++i) r.num[i] = a.num[i] - b.num[i];
                break;
            case BinaryOp::Mul:
                for (std::size_t i = 0; i < rows_; ++i) r.num[i] = a.num[i] * b.num[i];
                break;
            case BinaryOp::Div:
                for (std::size_t i = 0; i < rows_; ++i) {
                    if (b.num[i] == 0.0) {
                        r.valid[i] = 0;
                    } else {
                        r.num[i] = a.num[i] / b.num[i];
                    }
                }
                break;
            case BinaryOp::Eq:
            case BinaryOp::Ne: {
                const bool eq = e.binary_op == BinaryOp::Eq;
                for (std::size_t i = 0; i < rows_; ++i) {
                    bool same;
                    switch (a.type) {
                        case Dtype::Number: same = a.num[i] == b.num[i]; break;
                        case Dtype::Boolean: same = a.flag[i] == b.flag[i]; break;
                        default: same = a.str[i] == b.str[i]; break;
                    }
                    r.flag[i] = (same == eq) ? 1 : 0;
                }
                break;
            }
            case BinaryOp::Lt:
                for (std::size_t i = 0; i < rows_; ++i) r.flag[i] = a.num[i] < b.num[i];
                break;
            case BinaryOp::Le:
                for (std::size_t i = 0; i < rows_; ++i) r.flag[i] = a.num[i] <= b.num[i];
                break;
            case BinaryOp::Gt:
                for (std::size_t i = 0; i < rows_; ++i) r.flag[i] = a.num[i] > b.num[i];
                break;
            case BinaryOp::Ge:
                for (std::size_t i = 0; i < rows_; ++i) r.flag[i] = a.num[i] >= b.num[i];
                break;
            case BinaryOp::And:
                for (std::size_t i = 0; i < rows_; ++i) r.flag[i] = a.flag[i] && b.flag[i];
                break;
            case BinaryOp::Or:
                for (std::size_t i = 0; i < rows_; ++i) r.flag[i] = a.flag[i] || b.flag[i];
                break;
        }
        if (r.type == Dtype::Number) sanitize(r);
        return r;
    }

    Vec eval_call(const Expr& e) {
        const std::string& f = e.text;

        if (f == "if_else") {
            Vec c = eval(e.args[0]);
            Vec a = eval(e.args[1]);
            Vec b = eval(e.args[2]);
            Vec r = make(*e.type, rows_);
            for (std::size_t i = 0; i < rows_; ++i) {
                if (!c.valid[i]) continue;
                const Vec& src = c.flag[i] ? a : b;
                r.valid[i] = src.valid[i];
                if (!src.valid[i]) continue;
                switch (r.type) {
                    case Dtype::Number: r.num[i] = src.num[i]; break;
                    case Dtype::Boolean: r.flag[i] = src.flag[i]; break;
                    default: r.str[i] = src.str[i]; break;
                }
            }
            return r;
        }

        if (f == "bin") {
            Vec x = eval(e.args[0]);
            const auto& edges = e.args[1].args;
            const auto& labels = e.args[2].args;
            Vec r = make(Dtype::Category, rows_);
            for (const auto& l : labels) r.dictionary.push_back(l.text);
            const double lo = edges.front().number;
            const double hi = edges.back().number;
            for (std::size_t i = 0; i < rows_; ++i) {
                if (!x.valid[i] || !(x.num[i] > lo) || x.num[i] > hi) continue;
                std::size_t k = 0;
                while (x.num[i] > edges[k + 1].number) ++k;
                r.str[i] = labels[k].text;
                r.valid[i] = 1;
            }
            return r;
        }

        if (f == "str_split") {
            Vec s = eval(e.args[0]);
            const std::string& sep = e.args[1].text;
            const auto idx = static_cast<long long>(e.args[2].number);
            Vec r = make(Dtype::Text, rows_);
            for (std::size_t i = 0; i < rows_; ++i) {
                if (!s.valid[i]) continue;
                auto parts = split_all(s.str[i], sep);
                if (auto k = resolve_index(idx, parts.size())) {
                    r.str[i] = std::move(parts[*k]);
                    r.valid[i] = 1;
                }
            }
            return r;
        }

        if (f == "str_char") {
            Vec s = eval(e.args[0]);
            const auto idx = static_cast<long long>(e.args[1].number);
            Vec r = make(Dtype::Text, rows_);
            for (std::size_t i = 0; i < rows_; ++i) {
                if (!s.valid[i]) continue;
                auto starts = codepoint_starts(s.str[i]);
                if (auto k = resolve_index(idx, starts.size())) {
                    std::size_t end = *k + 1 < starts.size() ? starts[*k + 1] : s.str[i].size();
                    r.str[i] = s.str[i].substr(starts[*k], end - starts[*k]);
                    r.valid[i] = 1;
                }
            }
            return r;
        }

        if (f == "str_extract_int") {
            Vec s = eval(e.args[0]);
            Vec r = make(Dtype::Number, rows_);
            for (std::size_t i = 0; i < rows_; ++i) {
                if (!s.valid[i]) continue;
                const std::string& str = s.str[i];
                auto b = str.find_first_of("0123456789");
                if (b == std::string::npos) continue;
                auto end = str.find_first_not_of("0123456789", b);
                auto digits = str.substr(b, end == std::string::npos ? std::string::npos : end - b);
                if (auto v = parse_decimal(digits)) {
                    r.num[i] = *v;
                    r.valid[i] = 1;
                }
            }
            return r;
        }

        if (f == "str_endswith" || f == "str_contains") {
            Vec s = eval(e.args[0]);
            const std::string& needle = e.args[1].text;
            const bool ends = f == "str_endswith";
            Vec r = make(Dtype::Boolean, rows_);
            for (std::size_t i = 0; i < rows_; ++i) {
                if (!s.valid[i]) continue;
                const std::string& str = s.str[i];
                bool hit = ends ? (str.size() >= needle.size() &&
                                   str.compare(str.size() - needle.size(), needle.size(), needle) == 0)
                                : str.find(needle) != std::string::npos;
                r.flag[i] = hit ? 1 : 0;
                r.valid[i] = 1;
            }
            return r;
        }

        if (f == "fill_missing") {
            Vec x = eval(e.args[0]);
            const Expr& lit = e.args[1];
            for (std::size_t i = 0; i < rows_; ++i) {
                if (x.valid[i]) continue;
                x.valid[i] = 1;
                switch (x.type) {
                    case Dtype::Number: x.num[i] = lit.number; break;
                    case Dtype::Boolean: x.flag[i] = lit.boolean ? 1 : 0; break;
                    default: x.str[i] = lit.text; break;
                }
            }
            return x;
        }

        if (f == "is_missing") {
            Vec x = eval(e.args[0]);
            Vec r = make(Dtype::Boolean, rows_);
            for (std::size_t i = 0; i < rows_; ++i) {
                r.flag[i] = x.valid[i] ? 0 : 1;
                r.valid[i] = 1;
            }
            return r;
        }

        if (f == "as_number") {
            Vec x = eval(e.args[0]);
            Vec r = make(Dtype::Number, rows_);
            for (std::size_t i = 0; i < rows_; ++i) {
                if (!x.valid[i]) continue;
                if (x.type == Dtype::Boolean) {
                    r.num[i] = x.flag[i] ? 1.0 : 0.0;
                    r.valid[i] = 1;
                } else if (auto v = parse_decimal(x.str[i])) {
                    r.num[i] = *v;
                    r.valid[i] = 1;
                }
            }
            return r;
        }

        if (f == "as_category") {
            Vec x = eval(e.args[0]);
            Vec r = make(Dtype::Category, rows_);
            r.dictionary = std::move(x.dictionary);
            for (std::size_t i = 0; i < rows_; ++i) {
                if (!x.valid[i]) continue;
                r.str[i] = category_label(x, i);
                r.valid[i] = 1;
            }
            return r;
        }

        if (f == "as_int") {
            Vec x = eval(e.args[0]);
            if (std::find(x.valid.begin(), x.valid.end(), 0) != x.valid.end()) {
                throw ExecError(ErrorKind::RuntimeError, "cannot convert missing value to integer", e.pos);
            }
            for (std::size_t i = 0; i < rows_; ++i) x.num[i] = std::trunc(x.num[i]);
            return x;
        }

        if (f == "abs") {
            Vec x = eval(e.args[0]);
            for (std::size_t i = 0; i < rows_; ++i) x.num[i] = std::fabs(x.num[i]);
            return x;
        }

        if (f == "log") {
            Vec x = eval(e.args[0]);
            for (std::size_t i = 0; i < rows_; ++i) {
                if (!x.valid[i]) continue;
                if (x.num[i] <= 0.0) {
                    x.valid[i] = 0;
                    x.num[i] = 0.0;
                } else {
                    x.num[i] = std::log(x.num[i]);
                }
            }
            sanitize(x);
            return x;
        }

        if (f == "min2" || f == "max2") {
            Vec a = eval(e.args[0]);
            Vec b = eval(e.args[1]);
            const bool is_min = f == "min2";
            for (std::size_t i = 0; i < rows_; ++i) {
                a.valid[i] = a.valid[i] && b.valid[i];
                a.num[i] = is_min ? std::min(a.num[i], b.num[i]) : std::max(a.num[i], b.num[i]);
            }
            return a;
        }

        throw ExecError(ErrorKind::TypeError, "unknown function '" + f + "'", e.pos);
    }

    std::size_t rows_;
    std::vector<Column> columns_;
};

}  // namespace

Table evaluate(const FeatureScript& script, const Table& table) {
    FeatureScript typed = validate(script, table.schema());
    VectorInterpreter interp(table);
    return interp.run(typed, table.target());
}

}  // namespace autofe::dsl
