#include "autofe/dsl/dsl.hpp"

#include <charconv>
#include <cmath>

namespace autofe::dsl {

namespace {

enum class Tok {
    Ident, String, Number,
    LBrace, RBrace, LParen, RParen, LBracket, RBracket, Comma, Colon,
    Plus, Minus, Star, Slash, EqEq, NotEq, Lt, Le, Gt, Ge,
    End
};

struct Token {
    Tok kind = Tok::End;
    std::string text;   // identifier / decoded string / number spelling
    double number = 0.0;
    SourcePos pos;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::Ident: return "'" + t.text + "'";
        case Tok::String: return "string \"" + t.text + "\"";
        case Tok::Number: return "number " + t.text;
        case Tok::End: return "end of input";
        default: return "'" + t.text + "'";
    }
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space_and_comments();
            Token t;
            t.pos = {line_, col_};
            if (at_end()) {
                out.push_back(t);
                return out;
            }
            char c = peek();
            if (is_ident_start(c)) {
                while (!at_end() && is_ident_char(peek())) t.text += advance();
                t.kind = Tok::Ident;
            } else if (is_digit(c)) {
                lex_number(t);
            } else if (c == '"') {
                lex_string(t);
            } else {
                lex_punct(t);
            }
            out.push_back(std::move(t));
        }
    }

private:
    static bool is_digit(char c) { return c >= '0' && c <= '9'; }
    static bool is_ident_start(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
    }
    static bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

    bool at_end() const { return i_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const { return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0'; }
    char advance() {
        char c = src_[i_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    [[noreturn]] void fail(const std::string& msg, SourcePos pos) const {
        throw ExecError(ErrorKind::ParseError, msg, pos);
    }

    void skip_space_and_comments() {
        while (!at_end()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                advance();
            } else if (c == '#') {
                while (!at_end() && peek() != '\n') advance();
            } else {
                break;
            }
        }
    }

    void lex_number(Token& t) {
        std::string s;
        while (is_digit(peek())) s += advance();
        if (peek() == '.' && is_digit(peek(1))) {
            s += advance();
            while (is_digit(peek())) s += advance();
        }
        if ((peek() == 'e' || peek() == 'E') &&
            (is_digit(peek(1)) || ((peek(1) == '+' || peek(1) == '-') && is_digit(peek(2))))) {
            s += advance();
            if (peek() == '+' || peek() == '-') s += advance();
            while (is_digit(peek())) s += advance();
        }
        double v = 0.0;
        auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || !std::isfinite(v)) fail("number " + s + " is out of range", t.pos);
        t.kind = Tok::Number;
        t.text = std::move(s);
        t.number = v;
    }

    void lex_string(Token& t) {
        advance();  // opening quote
        for (;;) {
            if (at_end() || peek() == '\n') fail("unterminated string", t.pos);
            char c = advance();
            if (c == '"') break;
            if (c == '\\') {
                if (at_end()) fail("unterminated string", t.pos);
                SourcePos esc_pos{line_, col_ - 1};
                char e = advance();
                switch (e) {
                    case '"': t.text += '"'; break;
                    case '\\': t.text += '\\'; break;
                    case 'n': t.text += '\n'; break;
                    case 't': t.text += '\t'; break;
                    case 'r': t.text += '\r'; break;
                    default: fail(std::string("unknown escape sequence '\\") + e + "'", esc_pos);
                }
            } else {
                t.text += c;
            }
        }
        t.kind = Tok::String;
    }

    void lex_punct(Token& t) {
        char c = advance();
        t.text = std::string(1, c);
        switch (c) {
            case '{': t.kind = Tok::LBrace; return;
            case '}': t.kind = Tok::RBrace; return;
            case '(': t.kind = Tok::LParen; return;
            case ')': t.kind = Tok::RParen; return;
            case '[': t.kind = Tok::LBracket; return;
            case ']': t.kind = Tok::RBracket; return;
            case ',': t.kind = Tok::Comma; return;
            case ':': t.kind = Tok::Colon; return;
            case '+': t.kind = Tok::Plus; return;
            case '-': t.kind = Tok::Minus; return;
            case '*': t.kind = Tok::Star; return;
            case '/': t.kind = Tok::Slash; return;
            case '=':
                if (peek() == '=') {
                    advance();
                    t.kind = Tok::EqEq;
                    t.text = "==";
                    return;
                }
                fail("unexpected '='; use '==' for comparison", t.pos);
            case '!':
                if (peek() == '=') {
                    advance();
                    t.kind = Tok::NotEq;
                    t.text = "!=";
                    return;
                }
                fail("unexpected '!'; use 'not' for negation", t.pos);
            case '<':
                if (peek() == '=') {
                    advance();
                    t.kind = Tok::Le;
                    t.text = "<=";
                } else {
                    t.kind = Tok::Lt;
                }
                return;
            case '>':
                if (peek() == '=') {
                    advance();
                    t.kind = Tok::Ge;
                    t.text = ">=";
                } else {
                    t.kind = Tok::Gt;
                }
                return;
            default: break;
        }
        unsigned char uc = static_cast<unsigned char>(c);
        if (uc >= 0x80 || uc < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "0x%02X", uc);
            fail(std::string("unexpected character ") + buf, t.pos);
        }
        fail(std::string("unexpected character '") + c + "'", t.pos);
    }

    std::string_view src_;
    std::size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    FeatureScript script() {
        FeatureScript s;
        while (cur().kind != Tok::End) s.statements.push_back(statement());
        return s;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& next_tok() const { return toks_[std::min(pos_ + 1, toks_.size() - 1)]; }
    Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    bool is_word(std::string_view w) const { return cur().kind == Tok::Ident && cur().text == w; }

    [[noreturn]] void fail_expected(const std::string& what) const {
        throw ExecError(ErrorKind::ParseError, "expected " + what + " but found " + describe(cur()), cur().pos);
    }

    Token expect(Tok kind, const std::string& what) {
        if (cur().kind != kind) fail_expected(what);
        return take();
    }

    void expect_word(std::string_view w) {
        if (!is_word(w)) fail_expected("'" + std::string(w) + "'");
        take();
    }

    Statement statement() {
        if (is_word("feature")) return feature_def();
        if (is_word("drop")) return drop_stmt();
        fail_expected("'feature' or 'drop'");
    }

    FeatureDef feature_def() {
        FeatureDef f;
        f.pos = cur().pos;
        take();
        Token name = expect(Tok::String, "a feature name string");
        if (name.text.empty()) throw ExecError(ErrorKind::ParseError, "feature name must not be empty", name.pos);
        f.name = name.text;
        expect(Tok::LBrace, "'{'");
        bool has_usefulness = false;
        if (is_word("usefulness")) {
            take();
            expect(Tok::Colon, "':'");
            f.usefulness = expect(Tok::String, "a usefulness string").text;
            has_usefulness = true;
            if (cur().kind == Tok::Comma) take();
        }
        expect_word("expr");
        expect(Tok::Colon, "':'");
        f.expr = expression();
        expect(Tok::RBrace, "'}'");
        if (!has_usefulness || std::string_view(f.usefulness).find_first_not_of(" \t\r\n") == std::string_view::npos) {
            throw ExecError(ErrorKind::ParseError,
                            "feature \"" + f.name + "\" needs a non-empty usefulness explanation", f.pos);
        }
        return f;
    }

    DropColumn drop_stmt() {
        DropColumn d;
        d.pos = cur().pos;
        take();
        d.name = expect(Tok::String, "a column name string").text;
        if (is_word("reason")) {
            take();
            d.reason = expect(Tok::String, "a reason string").text;
        }
        return d;
    }

    // or > and > not > comparison > additive > multiplicative > unary > primary
    Expr expression() { return or_expr(); }

    Expr or_expr() {
        Expr lhs = and_expr();
        while (is_word("or")) {
            SourcePos p = take().pos;
            lhs = Expr::binary(BinaryOp::Or, std::move(lhs), and_expr(), p);
        }
        return lhs;
    }

    Expr and_expr() {
        Expr lhs = not_expr();
        while (is_word("and")) {
            SourcePos p = take().pos;
            lhs = Expr::binary(BinaryOp::And, std::move(lhs), not_expr(), p);
        }
        return lhs;
    }

    Expr not_expr() {
        if (is_word("not")) {
            SourcePos p = take().pos;
            return Expr::unary(UnaryOp::Not, not_expr(), p);
        }
        return comparison();
    }

    Expr comparison() {
        Expr lhs = additive();
        std::optional<BinaryOp> op;
        switch (cur().kind) {
            case Tok::EqEq: op = BinaryOp::Eq; break;
            case Tok::NotEq: op = BinaryOp::Ne; break;
            case Tok::Lt: op = BinaryOp::Lt; break;
            case Tok::Le: op = BinaryOp::Le; break;
            case Tok::Gt: op = BinaryOp::Gt; break;
            case Tok::Ge: op = BinaryOp::Ge; break;
            default: return lhs;
        }
        SourcePos p = take().pos;
        Expr rhs = additive();
        switch (cur().kind) {
            case Tok::EqEq: case Tok::NotEq: case Tok::Lt: case Tok::Le: case Tok::Gt: case Tok::Ge:
                throw ExecError(ErrorKind::ParseError,
                                "comparisons cannot be chained; combine them with 'and'", cur().pos);
            default: break;
        }
        return Expr::binary(*op, std::move(lhs), std::move(rhs), p);
    }

    Expr additive() {
        Expr lhs = multiplicative();
        while (cur().kind == Tok::Plus || cur().kind == Tok::Minus) {
            BinaryOp op = cur().kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
            SourcePos p = take().pos;
            lhs = Expr::binary(op, std::move(lhs), multiplicative(), p);
        }
        return lhs;
    }

    Expr multiplicative() {
        Expr lhs = unary();
        while (cur().kind == Tok::Star || cur().kind == Tok::Slash) {
            BinaryOp op = cur().kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
            SourcePos p = take().pos;
            lhs = Expr::binary(op, std::move(lhs), unary(), p);
        }
        return lhs;
    }

    Expr unary() {
        if (cur().kind == Tok::Minus) {
            SourcePos p = take().pos;
            // "-NUMBER" is a negative literal rather than a negation node.
            if (cur().kind == Tok::Number) return Expr::number_literal(-take().number, p);
            return Expr::unary(UnaryOp::Neg, unary(), p);
        }
        return primary();
    }

    Expr primary() {
        const Token& t = cur();
        switch (t.kind) {
            case Tok::Number: {
                Token n = take();
                return Expr::number_literal(n.number, n.pos);
            }
            case Tok::String: {
                Token s = take();
                return Expr::text_literal(s.text, s.pos);
            }
            case Tok::LParen: {
                take();
                Expr inner = expression();
                expect(Tok::RParen, "')'");
                return inner;
            }
            case Tok::LBracket: return list();
            case Tok::Ident: break;
            default: fail_expected("an expression");
        }
        if (t.text == "true" || t.text == "false") {
            Token b = take();
            return Expr::bool_literal(b.text == "true", b.pos);
        }
        if (t.text == "and" || t.text == "or" || t.text == "not" || t.text == "feature" || t.text == "drop") {
            fail_expected("an expression");
        }
        Token name = take();
        if (cur().kind != Tok::LParen) {
            throw ExecError(ErrorKind::ParseError,
                            "bare name '" + name.text + "'; refer to columns as col(\"" + name.text + "\")",
                            name.pos);
        }
        take();
        if (name.text == "col") {
            Token col = expect(Tok::String, "a column name string");
            expect(Tok::RParen, "')'");
            return Expr::column(col.text, name.pos);
        }
        std::vector<Expr> args;
        if (cur().kind != Tok::RParen) {
            args.push_back(expression());
            while (cur().kind == Tok::Comma) {
                take();
                args.push_back(expression());
            }
        }
        expect(Tok::RParen, "')' or ','");
        return Expr::call(name.text, std::move(args), name.pos);
    }

    Expr list() {
        SourcePos p = take().pos;
        std::vector<Expr> items;
        auto item = [&] {
            SourcePos ip = cur().pos;
            if (cur().kind == Tok::Minus && next_tok().kind == Tok::Number) {
                take();
                items.push_back(Expr::number_literal(-take().number, ip));
            } else if (cur().kind == Tok::Number) {
                items.push_back(Expr::number_literal(take().number, ip));
            } else if (cur().kind == Tok::String) {
                items.push_back(Expr::text_literal(take().text, ip));
            } else {
                fail_expected("a number or string literal");
            }
        };
        if (cur().kind != Tok::RBracket) {
            item();
            while (cur().kind == Tok::Comma) {
                take();
                item();
            }
        }
        expect(Tok::RBracket, "']' or ','");
        return Expr::list(std::move(items), p);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

FeatureScript parse(std::string_view source) {
    Parser p(Lexer(source).run());
    FeatureScript s = p.script();
    s.source_text = std::string(source);
    return s;
}

}  // namespace autofe::dsl
