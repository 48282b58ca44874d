#include "autofe/dsl/dsl.hpp"

#include "autofe/text_format.hpp"

namespace autofe::dsl {

namespace {

// Binding strength, loosest first.
enum Prec { kOr = 1, kAnd, kNot, kCompare, kAdd, kMul, kUnary, kPrimary };

int precedence(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Binary:
            switch (e.binary_op) {
                case BinaryOp::Or: return kOr;
                case BinaryOp::And: return kAnd;
                case BinaryOp::Add:
                case BinaryOp::Sub: return kAdd;
                case BinaryOp::Mul:
                case BinaryOp::Div: return kMul;
                default: return kCompare;
            }
        case Expr::Kind::Unary: return e.unary_op == UnaryOp::Not ? kNot : kUnary;
        case Expr::Kind::Number: return e.number < 0 || std::signbit(e.number) ? kUnary : kPrimary;
        default: return kPrimary;
    }
}

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    out += '"';
    return out;
}

void print(const Expr& e, int min_prec, std::string& out);

void print_child(const Expr& e, int min_prec, std::string& out) {
    if (precedence(e) < min_prec) {
        out += '(';
        print(e, 0, out);
        out += ')';
    } else {
        print(e, min_prec, out);
    }
}

void print(const Expr& e, int, std::string& out) {
    switch (e.kind) {
        case Expr::Kind::Column: out += "col(" + quote(e.text) + ")"; return;
        case Expr::Kind::Number: out += format_number_exact(e.number); return;
        case Expr::Kind::Text: out += quote(e.text); return;
        case Expr::Kind::Boolean: out += e.boolean ? "true" : "false"; return;
        case Expr::Kind::List:
            out += '[';
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += ", ";
                print(e.args[i], 0, out);
            }
            out += ']';
            return;
        case Expr::Kind::Unary:
            if (e.unary_op == UnaryOp::Not) {
                out += "not ";
                print_child(e.args[0], kNot, out);
            } else {
                out += '-';
                // A literal right after '-' would re-parse as a negative literal.
                if (e.args[0].kind == Expr::Kind::Number) {
                    out += '(';
                    print(e.args[0], 0, out);
                    out += ')';
                } else {
                    print_child(e.args[0], kUnary, out);
                }
            }
            return;
        case Expr::Kind::Binary: {
            const int p = precedence(e);
            // Left-associative chains; comparisons do not chain at all.
            print_child(e.args[0], p == kCompare ? p + 1 : p, out);
            out += ' ';
            out += op_symbol(e.binary_op);
            out += ' ';
            print_child(e.args[1], p + 1, out);
            return;
        }
        case Expr::Kind::Call:
            out += e.text;
            out += '(';
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += ", ";
                print(e.args[i], 0, out);
            }
            out += ')';
            return;
    }
}

}  // namespace

std::string pretty_print(const Expr& expr) {
    std::string out;
    print(expr, 0, out);
    return out;
}

std::string pretty_print(const FeatureScript& script) {
    std::string out;
    for (std::size_t i = 0; i < script.statements.size(); ++i) {
        if (i) out += '\n';
        const auto& st = script.statements[i];
        if (const auto* f = std::get_if<FeatureDef>(&st)) {
            out += "feature " + quote(f->name) + " {\n";
            out += "  usefulness: " + quote(f->usefulness) + "\n";
            out += "  expr: " + pretty_print(f->expr) + "\n";
            out += "}\n";
        } else {
            const auto& d = std::get<DropColumn>(st);
            out += "drop " + quote(d.name);
            if (!d.reason.empty()) out += " reason " + quote(d.reason);
            out += '\n';
        }
    }
    return out;
}

}  // namespace autofe::dsl
