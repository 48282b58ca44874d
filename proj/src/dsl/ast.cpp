#include "autofe/dsl/ast.hpp"
#include "autofe/dsl/dsl.hpp"
#include "autofe/dsl/error.hpp"

#include <algorithm>
#include <set>

namespace autofe::dsl {

std::string_view op_symbol(BinaryOp op) {
    switch (op) {
        case BinaryOp::Add: return "+";
        case BinaryOp::Sub: return "-";
        case BinaryOp::Mul: return "*";
        case BinaryOp::Div: return "/";
        case BinaryOp::Eq: return "==";
        case BinaryOp::Ne: return "!=";
        case BinaryOp::Lt: return "<";
        case BinaryOp::Le: return "<=";
        case BinaryOp::Gt: return ">";
        case BinaryOp::Ge: return ">=";
        case BinaryOp::And: return "and";
        case BinaryOp::Or: return "or";
    }
    return "?";
}

std::string_view op_symbol(UnaryOp op) { return op == UnaryOp::Neg ? "-" : "not"; }

Expr Expr::column(std::string name, SourcePos pos) {
    Expr e;
    e.kind = Kind::Column;
    e.text = std::move(name);
    e.pos = pos;
    return e;
}

Expr Expr::number_literal(double v, SourcePos pos) {
    Expr e;
    e.kind = Kind::Number;
    e.number = v;
    e.pos = pos;
    return e;
}

Expr Expr::text_literal(std::string v, SourcePos pos) {
    Expr e;
    e.kind = Kind::Text;
    e.text = std::move(v);
    e.pos = pos;
    return e;
}

Expr Expr::bool_literal(bool v, SourcePos pos) {
    Expr e;
    e.kind = Kind::Boolean;
    e.boolean = v;
    e.pos = pos;
    return e;
}

Expr Expr::list(std::vector<Expr> items, SourcePos pos) {
    Expr e;
    e.kind = Kind::List;
    e.args = std::move(items);
    e.pos = pos;
    return e;
}

Expr Expr::unary(UnaryOp op, Expr operand, SourcePos pos) {
    Expr e;
    e.kind = Kind::Unary;
    e.unary_op = op;
    e.args.push_back(std::move(operand));
    e.pos = pos;
    return e;
}

Expr Expr::binary(BinaryOp op, Expr lhs, Expr rhs, SourcePos pos) {
    Expr e;
    e.kind = Kind::Binary;
    e.binary_op = op;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    e.pos = pos;
    return e;
}

Expr Expr::call(std::string callee, std::vector<Expr> args, SourcePos pos) {
    Expr e;
    e.kind = Kind::Call;
    e.text = std::move(callee);
    e.args = std::move(args);
    e.pos = pos;
    return e;
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case Expr::Kind::Column:
        case Expr::Kind::Text: return a.text == b.text;
        case Expr::Kind::Number: return a.number == b.number;
        case Expr::Kind::Boolean: return a.boolean == b.boolean;
        case Expr::Kind::List: return a.args == b.args;
        case Expr::Kind::Unary: return a.unary_op == b.unary_op && a.args == b.args;
        case Expr::Kind::Binary: return a.binary_op == b.binary_op && a.args == b.args;
        case Expr::Kind::Call: return a.text == b.text && a.args == b.args;
    }
    return false;
}

FeatureScript concat(const FeatureScript& a, const FeatureScript& b) {
    FeatureScript out;
    out.statements = a.statements;
    out.statements.insert(out.statements.end(), b.statements.begin(), b.statements.end());
    out.source_text = pretty_print(out);
    return out;
}

namespace {

void collect_columns(const Expr& e, const std::set<std::string>& defined, std::vector<std::string>& out) {
    if (e.kind == Expr::Kind::Column && !defined.count(e.text) &&
        std::find(out.begin(), out.end(), e.text) == out.end()) {
        out.push_back(e.text);
    }
    for (const auto& arg : e.args) collect_columns(arg, defined, out);
}

}  // namespace

std::vector<std::string> input_columns(const FeatureScript& script) {
    std::set<std::string> defined;
    std::vector<std::string> out;
    for (const auto& st : script.statements) {
        if (const auto* f = std::get_if<FeatureDef>(&st)) {
            collect_columns(f->expr, defined, out);
            defined.insert(f->name);
        } else {
            const auto& d = std::get<DropColumn>(st);
            if (!defined.count(d.name) && std::find(out.begin(), out.end(), d.name) == out.end()) {
                out.push_back(d.name);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Errors

std::string_view error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ParseError: return "ParseError";
        case ErrorKind::UnknownColumn: return "UnknownColumn";
        case ErrorKind::TypeError: return "TypeError";
        case ErrorKind::ArityError: return "ArityError";
        case ErrorKind::RuntimeError: return "RuntimeError";
        case ErrorKind::DuplicateFeature: return "DuplicateFeature";
    }
    return "Error";
}

namespace {

std::string render_error(ErrorKind kind, const std::string& message, const std::optional<SourcePos>& loc) {
    std::string out(error_kind_name(kind));
    if (loc && loc->line > 0) {
        out += " at line " + std::to_string(loc->line) + ", column " + std::to_string(loc->column);
    }
    out += ": ";
    out += message;
    return out;
}

}  // namespace

ExecError::ExecError(ErrorKind kind, std::string message, std::optional<SourcePos> location)
    : std::runtime_error(render_error(kind, message, location)),
      kind_(kind),
      message_(std::move(message)),
      location_(location) {}

// ---------------------------------------------------------------------------
// Whitelist

const std::vector<BuiltinInfo>& builtin_functions() {
    static const std::vector<BuiltinInfo> table = {
        {"if_else", "if_else(boolean, T, T) -> T", "pick the second argument where the condition holds, else the third"},
        {"bin", "bin(number, [e0, ..., ek], [\"l1\", ..., \"lk\"]) -> category",
         "label of the interval (e[i-1], e[i]]; values outside (e0, ek] are missing"},
        {"str_split", "str_split(text, \"sep\", index) -> text", "piece of a split string; negative index counts from the end"},
        {"str_char", "str_char(text, index) -> text", "single character; negative index counts from the end"},
        {"str_extract_int", "str_extract_int(text) -> number", "first run of digits; missing if there is none"},
        {"str_endswith", "str_endswith(text, \"suffix\") -> boolean", "whether the text ends with the suffix"},
        {"str_contains", "str_contains(text, \"needle\") -> boolean", "whether the text contains the needle"},
        {"fill_missing", "fill_missing(T, literal) -> T", "replace missing cells with a literal"},
        {"is_missing", "is_missing(any) -> boolean", "true where the cell is missing"},
        {"as_number", "as_number(text | boolean | category) -> number", "numeric value; missing when unparseable"},
        {"as_int", "as_int(number) -> number", "truncate toward zero; fails if any cell is missing"},
        {"as_category", "as_category(any) -> category", "treat values as category labels"},
        {"abs", "abs(number) -> number", "absolute value"},
        {"log", "log(number) -> number", "natural logarithm; missing for values <= 0"},
        {"min2", "min2(number, number) -> number", "smaller of two values"},
        {"max2", "max2(number, number) -> number", "larger of two values"},
    };
    return table;
}

bool is_builtin(std::string_view name) {
    for (const auto& b : builtin_functions()) {
        if (b.name == name) return true;
    }
    return false;
}

}  // namespace autofe::dsl
