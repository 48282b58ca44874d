#include "autofe/dsl/dsl.hpp"

#include <cmath>
#include <map>

namespace autofe::dsl {

namespace {

std::string type_word(Dtype t) { return std::string(dtype_name(t)); }

bool is_stringy(Dtype t) { return t == Dtype::Text || t == Dtype::Category; }

std::optional<Dtype> unify(Dtype a, Dtype b) {
    if (a == b) return a;
    if (is_stringy(a) && is_stringy(b)) return Dtype::Category;
    return std::nullopt;
}

class Validator {
public:
    explicit Validator(const Schema& schema) : target_(schema.target) {
        for (const auto& [name, type] : schema.columns) visible_.emplace_back(name, type);
    }

    FeatureScript run(const FeatureScript& in) {
        FeatureScript out = in;
        for (auto& st : out.statements) {
            if (auto* f = std::get_if<FeatureDef>(&st)) {
                if (find(f->name)) {
                    throw ExecError(ErrorKind::DuplicateFeature,
                                    "column \"" + f->name + "\" already exists; choose a new feature name", f->pos);
                }
                Dtype t = check(f->expr);
                if (t != Dtype::Number && t != Dtype::Boolean && t != Dtype::Category && t != Dtype::Text) {
                    throw ExecError(ErrorKind::TypeError, "feature expression has no column type", f->pos);
                }
                visible_.emplace_back(f->name, t);
            } else {
                auto& d = std::get<DropColumn>(st);
                if (d.name == target_) {
                    throw ExecError(ErrorKind::TypeError, "cannot drop the target column \"" + d.name + "\"", d.pos);
                }
                if (!find(d.name)) {
                    throw ExecError(ErrorKind::UnknownColumn, "cannot drop unknown column \"" + d.name + "\"", d.pos);
                }
                std::erase_if(visible_, [&](const auto& p) { return p.first == d.name; });
            }
        }
        return out;
    }

    Schema schema() const {
        Schema s;
        s.target = target_;
        s.columns = visible_;
        return s;
    }

private:
    std::optional<Dtype> find(const std::string& name) const {
        for (const auto& [n, t] : visible_) {
            if (n == name) return t;
        }
        return std::nullopt;
    }

    [[noreturn]] static void type_error(const std::string& msg, SourcePos pos) {
        throw ExecError(ErrorKind::TypeError, msg, pos);
    }

    static void arity(const Expr& e, std::size_t n) {
        if (e.args.size() != n) {
            throw ExecError(ErrorKind::ArityError,
                            "function '" + e.text + "' expects " + std::to_string(n) + " argument" +
                                (n == 1 ? "" : "s") + " but got " + std::to_string(e.args.size()),
                            e.pos);
        }
    }

    static void arg_type(const Expr& call, std::size_t i, bool ok, const std::string& wanted) {
        if (!ok) {
            type_error("argument " + std::to_string(i + 1) + " of " + call.text + " must be " + wanted +
                           ", got " + type_word(*call.args[i].type),
                       call.args[i].pos);
        }
    }

    static const Expr& literal_arg(const Expr& call, std::size_t i, Expr::Kind kind, const std::string& wanted) {
        const Expr& a = call.args[i];
        if (a.kind != kind) {
            type_error("argument " + std::to_string(i + 1) + " of " + call.text + " must be " + wanted, a.pos);
        }
        return a;
    }

    static long long index_literal(const Expr& call, std::size_t i) {
        const Expr& a = literal_arg(call, i, Expr::Kind::Number, "an integer literal");
        if (a.number != std::trunc(a.number) || std::fabs(a.number) > 1e9) {
            type_error("argument " + std::to_string(i + 1) + " of " + call.text + " must be an integer literal", a.pos);
        }
        return static_cast<long long>(a.number);
    }

    Dtype check(Expr& e) {
        Dtype t = infer(e);
        e.type = t;
        return t;
    }

    Dtype infer(Expr& e) {
        switch (e.kind) {
            case Expr::Kind::Column: {
                if (e.text == target_) {
                    throw ExecError(ErrorKind::UnknownColumn,
                                    "column \"" + e.text + "\" is the prediction target and cannot be used in features",
                                    e.pos);
                }
                auto t = find(e.text);
                if (!t) throw ExecError(ErrorKind::UnknownColumn, "unknown column \"" + e.text + "\"", e.pos);
                return *t;
            }
            case Expr::Kind::Number: return Dtype::Number;
            case Expr::Kind::Text: return Dtype::Text;
            case Expr::Kind::Boolean: return Dtype::Boolean;
            case Expr::Kind::List:
                type_error("list literals are only allowed as bin() edges and labels", e.pos);
            case Expr::Kind::Unary: {
                Dtype a = check(e.args[0]);
                if (e.unary_op == UnaryOp::Neg) {
                    if (a != Dtype::Number) type_error("operator '-' cannot be applied to " + type_word(a), e.pos);
                    return Dtype::Number;
                }
                if (a != Dtype::Boolean) type_error("operator 'not' cannot be applied to " + type_word(a), e.pos);
                return Dtype::Boolean;
            }
            case Expr::Kind::Binary: return infer_binary(e);
            case Expr::Kind::Call: return infer_call(e);
        }
        type_error("unsupported expression", e.pos);
    }

    Dtype infer_binary(Expr& e) {
        Dtype a = check(e.args[0]);
        Dtype b = check(e.args[1]);
        auto mismatch = [&]() {
            type_error("operator '" + std::string(op_symbol(e.binary_op)) + "' cannot be applied to " +
                           type_word(a) + " and " + type_word(b),
                       e.pos);
        };
        switch (e.binary_op) {
            case BinaryOp::Add:
            case BinaryOp::Sub:
            case BinaryOp::Mul:
            case BinaryOp::Div:
                if (a != Dtype::Number || b != Dtype::Number) mismatch();
                return Dtype::Number;
            case BinaryOp::Eq:
            case BinaryOp::Ne:
                if (!(a == b || (is_stringy(a) && is_stringy(b)))) mismatch();
                return Dtype::Boolean;
            case BinaryOp::Lt:
            case BinaryOp::Le:
            case BinaryOp::Gt:
            case BinaryOp::Ge:
                if (a != Dtype::Number || b != Dtype::Number) mismatch();
                return Dtype::Boolean;
            case BinaryOp::And:
            case BinaryOp::Or:
                if (a != Dtype::Boolean || b != Dtype::Boolean) mismatch();
                return Dtype::Boolean;
        }
        mismatch();
        return Dtype::Number;
    }

    Dtype infer_call(Expr& e) {
        const std::string& f = e.text;
        if (!is_builtin(f)) {
            std::string names;
            for (const auto& b : builtin_functions()) {
                if (!names.empty()) names += ", ";
                names += b.name;
            }
            type_error("unknown function '" + f + "'; available functions: " + names, e.pos);
        }

        if (f == "bin") {
            arity(e, 3);
            Dtype x = check(e.args[0]);
            arg_type(e, 0, x == Dtype::Number, "number");
            const Expr& edges = literal_arg(e, 1, Expr::Kind::List, "a list of number literals");
            const Expr& labels = literal_arg(e, 2, Expr::Kind::List, "a list of string literals");
            if (edges.args.size() < 2) type_error("bin needs at least two edges", edges.pos);
            for (std::size_t i = 0; i < edges.args.size(); ++i) {
                if (edges.args[i].kind != Expr::Kind::Number) type_error("bin edges must be numbers", edges.args[i].pos);
                if (i > 0 && !(edges.args[i].number > edges.args[i - 1].number)) {
                    type_error("bin edges must be strictly increasing", edges.args[i].pos);
                }
            }
            for (const auto& l : labels.args) {
                if (l.kind != Expr::Kind::Text) type_error("bin labels must be strings", l.pos);
            }
            if (labels.args.size() + 1 != edges.args.size()) {
                throw ExecError(ErrorKind::ArityError,
                                "bin has " + std::to_string(edges.args.size()) + " edges and " +
                                    std::to_string(labels.args.size()) + " labels; it needs one label fewer than edges",
                                e.pos);
            }
            e.args[1].type = Dtype::Number;
            e.args[2].type = Dtype::Text;
            return Dtype::Category;
        }

        if (f == "if_else") {
            arity(e, 3);
            Dtype c = check(e.args[0]);
            Dtype a = check(e.args[1]);
            Dtype b = check(e.args[2]);
            arg_type(e, 0, c == Dtype::Boolean, "boolean");
            auto u = unify(a, b);
            if (!u) type_error("if_else branches have different types: " + type_word(a) + " and " + type_word(b), e.pos);
            return *u;
        }

        if (f == "str_split" || f == "str_char" || f == "str_endswith" || f == "str_contains" ||
            f == "str_extract_int") {
            const std::size_t n = f == "str_split" ? 3 : (f == "str_extract_int" ? 1 : 2);
            arity(e, n);
            Dtype s = check(e.args[0]);
            arg_type(e, 0, is_stringy(s), "text or category");
            if (f == "str_split") {
                const Expr& sep = literal_arg(e, 1, Expr::Kind::Text, "a string literal");
                if (sep.text.empty()) type_error("str_split separator must not be empty", sep.pos);
                e.args[1].type = Dtype::Text;
                index_literal(e, 2);
                e.args[2].type = Dtype::Number;
                return Dtype::Text;
            }
            if (f == "str_char") {
                index_literal(e, 1);
                e.args[1].type = Dtype::Number;
                return Dtype::Text;
            }
            if (f == "str_extract_int") return Dtype::Number;
            literal_arg(e, 1, Expr::Kind::Text, "a string literal");
            e.args[1].type = Dtype::Text;
            return Dtype::Boolean;
        }

        if (f == "fill_missing") {
            arity(e, 2);
            Dtype x = check(e.args[0]);
            const Expr& lit = e.args[1];
            if (!lit.is_literal()) type_error("argument 2 of fill_missing must be a literal", lit.pos);
            Dtype l = check(e.args[1]);
            if (!(x == l || (x == Dtype::Category && l == Dtype::Text))) {
                type_error("fill_missing value of type " + type_word(l) + " does not match " + type_word(x), lit.pos);
            }
            return x;
        }

        if (f == "is_missing" || f == "as_category") {
            arity(e, 1);
            check(e.args[0]);
            return f == "is_missing" ? Dtype::Boolean : Dtype::Category;
        }

        if (f == "as_number") {
            arity(e, 1);
            Dtype x = check(e.args[0]);
            arg_type(e, 0, x != Dtype::Number, "text, boolean or category");
            return Dtype::Number;
        }

        // as_int, abs, log, min2, max2: numeric in, numeric out.
        const std::size_t n = (f == "min2" || f == "max2") ? 2 : 1;
        arity(e, n);
        for (std::size_t i = 0; i < n; ++i) {
            Dtype x = check(e.args[i]);
            arg_type(e, i, x == Dtype::Number, "number");
        }
        return Dtype::Number;
    }

    std::string target_;
    std::vector<std::pair<std::string, Dtype>> visible_;
};

}  // namespace

FeatureScript validate(const FeatureScript& script, const Schema& schema) {
    Validator v(schema);
    return v.run(script);
}

Schema result_schema(const FeatureScript& script, const Schema& schema) {
    Validator v(schema);
    v.run(script);
    return v.schema();
}

}  // namespace autofe::dsl
