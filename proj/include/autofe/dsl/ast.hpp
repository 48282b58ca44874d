#pragma once

#include "autofe/table.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace autofe::dsl {

struct SourcePos {
    int line = 0;
    int column = 0;
};

enum class BinaryOp { Add, Sub, Mul, Div, Eq, Ne, Lt, Le, Gt, Ge, And, Or };
enum class UnaryOp { Neg, Not };

std::string_view op_symbol(BinaryOp op);
std::string_view op_symbol(UnaryOp op);

/// Expression tree node. `text` holds the column name for Column nodes, the
/// string payload for Text literals and the callee for Call nodes.
struct Expr {
    enum class Kind { Column, Number, Text, Boolean, List, Unary, Binary, Call };

    Kind kind = Kind::Number;
    double number = 0.0;
    bool boolean = false;
    std::string text;
    UnaryOp unary_op = UnaryOp::Neg;
    BinaryOp binary_op = BinaryOp::Add;
    std::vector<Expr> args;
    SourcePos pos;
    /// Static result type, assigned by validate().
    std::optional<Dtype> type;

    static Expr column(std::string name, SourcePos pos = {});
    static Expr number_literal(double v, SourcePos pos = {});
    static Expr text_literal(std::string v, SourcePos pos = {});
    static Expr bool_literal(bool v, SourcePos pos = {});
    static Expr list(std::vector<Expr> items, SourcePos pos = {});
    static Expr unary(UnaryOp op, Expr operand, SourcePos pos = {});
    static Expr binary(BinaryOp op, Expr lhs, Expr rhs, SourcePos pos = {});
    static Expr call(std::string callee, std::vector<Expr> args, SourcePos pos = {});

    bool is_literal() const {
        return kind == Kind::Number || kind == Kind::Text || kind == Kind::Boolean;
    }

    /// Structural equality; positions and inferred types are ignored.
    friend bool operator==(const Expr& a, const Expr& b);
};

struct FeatureDef {
    std::string name;
    std::string usefulness;
    Expr expr;
    SourcePos pos;

    friend bool operator==(const FeatureDef& a, const FeatureDef& b) {
        return a.name == b.name && a.usefulness == b.usefulness && a.expr == b.expr;
    }
};

struct DropColumn {
    std::string name;
    std::string reason;
    SourcePos pos;

    friend bool operator==(const DropColumn& a, const DropColumn& b) {
        return a.name == b.name && a.reason == b.reason;
    }
};

using Statement = std::variant<FeatureDef, DropColumn>;

struct FeatureScript {
    std::vector<Statement> statements;
    std::string source_text;

    bool empty() const { return statements.empty(); }

    /// Compares statement lists only.
    friend bool operator==(const FeatureScript& a, const FeatureScript& b) {
        return a.statements == b.statements;
    }
};

/// Statements of `a` followed by those of `b`.
FeatureScript concat(const FeatureScript& a, const FeatureScript& b);

/// Names of columns a script reads from its input table (excludes columns it
/// defines itself before reading them).
std::vector<std::string> input_columns(const FeatureScript& script);

}  // namespace autofe::dsl
