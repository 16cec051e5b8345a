#include "flatq/lang/parser.hpp"

#include <charconv>
#include <limits>

namespace flatq::lang {

namespace {

enum class Tok : std::uint8_t { Name, Int, Float, Op, Newline, Indent, Dedent, End };

struct Token {
    Tok kind;
    std::string text;
    SourceSpan span;
    std::int64_t int_value = 0;
    double float_value = 0.0;
};

[[noreturn]] void fail(DiagnosticKind kind, SourceSpan span, std::string message) {
    throw QueryError(Diagnostic{kind, span, std::move(message)});
}

bool is_keyword(std::string_view s) {
    return s == "for" || s == "in" || s == "if" || s == "elif" || s == "else" || s == "and" || s == "or" ||
           s == "not" || s == "is" || s == "None";
}

bool ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }
bool digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        while (pos_ < src_.size()) {
            if (line_start_ && brackets_.empty()) {
                if (!begin_line()) continue;
            }
            char c = src_[pos_];
            if (c == ' ' || c == '\t' || c == '\r') {
                advance();
            } else if (c == '#') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (c == '\n') {
                if (brackets_.empty()) {
                    emit(Tok::Newline, "\\n", col_, col_ + 1);
                    line_start_ = true;
                }
                newline();
            } else if (ident_start(c)) {
                lex_name();
            } else if (digit(c) || (c == '.' && pos_ + 1 < src_.size() && digit(src_[pos_ + 1]))) {
                lex_number();
            } else {
                lex_operator();
            }
        }
        if (!brackets_.empty()) {
            const auto &open = brackets_.back();
            fail(DiagnosticKind::Lex, open.span, "unclosed '" + open.text + "'");
        }
        if (!out_.empty() && out_.back().kind != Tok::Newline) emit(Tok::Newline, "\\n", col_, col_ + 1);
        while (indents_.size() > 1) {
            indents_.pop_back();
            emit(Tok::Dedent, "", 1, 1);
        }
        emit(Tok::End, "", col_, col_);
        return std::move(out_);
    }

private:
    // Measures indentation of a new logical line; returns false if the line was blank.
    bool begin_line() {
        int width = 0;
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) {
            if (src_[pos_] == '\t')
                fail(DiagnosticKind::Indentation, {line_, col_, col_ + 1}, "tab in indentation; use spaces only");
            ++width;
            advance();
        }
        if (pos_ >= src_.size()) return false;
        char c = src_[pos_];
        if (c == '\n' || c == '#' || c == '\r') {
            while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            if (pos_ < src_.size()) newline();
            return false;
        }
        line_start_ = false;
        if (width > indents_.back()) {
            indents_.push_back(width);
            emit(Tok::Indent, "", 1, width + 1);
        } else {
            while (width < indents_.back()) {
                indents_.pop_back();
                emit(Tok::Dedent, "", 1, width + 1);
            }
            if (width != indents_.back())
                fail(DiagnosticKind::Indentation, {line_, 1, width + 1},
                     "dedent to column " + std::to_string(width + 1) + " matches no enclosing block");
        }
        return true;
    }

    void lex_name() {
        int start = col_;
        std::size_t b = pos_;
        while (pos_ < src_.size() && ident_char(src_[pos_])) advance();
        emit(Tok::Name, std::string(src_.substr(b, pos_ - b)), start, col_);
    }

    void lex_number() {
        int start = col_;
        std::size_t b = pos_;
        bool is_float = false;
        while (pos_ < src_.size() && digit(src_[pos_])) advance();
        if (pos_ + 1 < src_.size() && src_[pos_] == '.' && digit(src_[pos_ + 1])) {
            is_float = true;
            advance();
            while (pos_ < src_.size() && digit(src_[pos_])) advance();
        }
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t save = pos_;
            int save_col = col_;
            advance();
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
            if (pos_ < src_.size() && digit(src_[pos_])) {
                is_float = true;
                while (pos_ < src_.size() && digit(src_[pos_])) advance();
            } else {
                pos_ = save;
                col_ = save_col;
            }
        }
        if (pos_ < src_.size() && ident_char(src_[pos_]))
            fail(DiagnosticKind::Lex, {line_, start, col_ + 1}, "malformed number literal");
        std::string text(src_.substr(b, pos_ - b));
        Token t{is_float ? Tok::Float : Tok::Int, text, {line_, start, col_}};
        const char *first = text.data(), *last = text.data() + text.size();
        if (is_float) {
            auto r = std::from_chars(first, last, t.float_value);
            if (r.ec != std::errc() || r.ptr != last)
                fail(DiagnosticKind::Lex, t.span, "float literal '" + text + "' is out of range");
        } else {
            auto r = std::from_chars(first, last, t.int_value);
            if (r.ec != std::errc() || r.ptr != last)
                fail(DiagnosticKind::Lex, t.span, "integer literal '" + text + "' is out of range");
        }
        out_.push_back(std::move(t));
    }

    void lex_operator() {
        int start = col_;
        char c = src_[pos_];
        char n = pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0';
        std::string op;
        if ((c == '<' || c == '>' || c == '=' || c == '!') && n == '=') {
            op = std::string{c, n};
        } else if (std::string_view("()[],:.+-*/<>=").find(c) != std::string_view::npos) {
            op = std::string{c};
        } else {
            fail(DiagnosticKind::Lex, {line_, start, start + 1}, std::string("unexpected character '") + c + "'");
        }
        for (std::size_t i = 0; i < op.size(); ++i) advance();
        SourceSpan span{line_, start, col_};
        if (op == "(" || op == "[") {
            brackets_.push_back({Tok::Op, op, span});
        } else if (op == ")" || op == "]") {
            std::string want = op == ")" ? "(" : "[";
            if (brackets_.empty() || brackets_.back().text != want)
                fail(DiagnosticKind::Lex, span, "unmatched '" + op + "'");
            brackets_.pop_back();
        }
        out_.push_back({Tok::Op, op, span});
    }

    void emit(Tok kind, std::string text, int b, int e) { out_.push_back({kind, std::move(text), {line_, b, e}}); }
    void advance() {
        ++pos_;
        ++col_;
    }
    void newline() {
        ++pos_;
        ++line_;
        col_ = 1;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    bool line_start_ = true;
    std::vector<int> indents_{0};
    std::vector<Token> brackets_;
    std::vector<Token> out_;
};

SourceSpan cover(SourceSpan a, SourceSpan b) {
    SourceSpan s = a;
    if (b.line == a.line) s.col_end = b.col_end;
    return s;
}

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    QueryAst program() {
        QueryAst ast;
        while (peek().kind != Tok::End) ast.statements.push_back(statement());
        return ast;
    }

private:
    const Token &peek(std::size_t ahead = 0) const {
        return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
    }
    const Token &take() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
    const Token &previous() const { return toks_[pos_ - 1]; }

    bool at_op(std::string_view op, std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Op && peek(ahead).text == op;
    }
    bool at_name(std::string_view name, std::size_t ahead = 0) const {
        return peek(ahead).kind == Tok::Name && peek(ahead).text == name;
    }

    [[noreturn]] void unexpected(std::string_view wanted) const {
        const auto &t = peek();
        std::string got;
        switch (t.kind) {
        case Tok::Newline: got = "end of line"; break;
        case Tok::Indent: got = "indent"; break;
        case Tok::Dedent: got = "dedent"; break;
        case Tok::End: got = "end of input"; break;
        default: got = "'" + t.text + "'";
        }
        if (t.kind == Tok::Indent) fail(DiagnosticKind::Indentation, t.span, "unexpected indent");
        fail(DiagnosticKind::Syntax, t.span, "expected " + std::string(wanted) + ", found " + got);
    }

    const Token &expect_op(std::string_view op) {
        if (!at_op(op)) unexpected("'" + std::string(op) + "'");
        return take();
    }

    const Token &expect_name(std::string_view what) {
        if (peek().kind != Tok::Name || is_keyword(peek().text)) unexpected(what);
        return take();
    }

    void expect_newline() {
        if (peek().kind != Tok::Newline) unexpected("end of line");
        take();
    }

    std::vector<StmtPtr> block() {
        expect_op(":");
        expect_newline();
        if (peek().kind != Tok::Indent)
            fail(DiagnosticKind::Indentation, peek().span, "expected an indented block");
        take();
        std::vector<StmtPtr> body;
        while (peek().kind != Tok::Dedent && peek().kind != Tok::End) body.push_back(statement());
        if (peek().kind == Tok::Dedent) take();
        return body;
    }

    StmtPtr statement() {
        const Token &t = peek();
        if (t.kind == Tok::Indent) fail(DiagnosticKind::Indentation, t.span, "unexpected indent");
        if (at_name("for")) return for_statement();
        if (at_name("if")) return if_statement();
        if (at_name("elif") || at_name("else"))
            fail(DiagnosticKind::Syntax, t.span, "'" + t.text + "' without a matching 'if'");
        if (at_name("fill_histogram") && at_op("(", 1)) return fill_statement();
        if (t.kind == Tok::Name && at_op("=", 1)) {
            if (is_keyword(t.text)) fail(DiagnosticKind::Syntax, t.span, "cannot assign to keyword '" + t.text + "'");
            const Token &name = take();
            take();
            auto value = expression();
            auto s = Stmt::assign(name.text, value, cover(name.span, value->span));
            expect_newline();
            return s;
        }
        // Parse an expression so the diagnostic points at something meaningful.
        auto e = expression();
        fail(DiagnosticKind::Syntax, e->span, "expected a statement (for, if, assignment or fill_histogram)");
    }

    StmtPtr for_statement() {
        const Token &kw = take();
        const Token &var = expect_name("a loop variable");
        if (!at_name("in")) unexpected("'in'");
        take();
        if (at_name("range") && at_op("(", 1)) {
            const Token &r = take();
            take();
            std::vector<ExprPtr> args = arguments();
            const Token &close = previous();
            if (args.empty() || args.size() > 2)
                fail(DiagnosticKind::Arity, cover(r.span, close.span),
                     "range() takes 1 or 2 arguments, got " + std::to_string(args.size()));
            ExprPtr start = args.size() == 2 ? args[0] : nullptr;
            ExprPtr end = args.back();
            auto body = block();
            return Stmt::for_range(var.text, start, end, std::move(body), cover(kw.span, close.span));
        }
        auto iterable = expression();
        SourceSpan span = cover(kw.span, iterable->span);
        auto body = block();
        return Stmt::for_each(var.text, iterable, std::move(body), span);
    }

    StmtPtr if_statement() {
        const Token &kw = take();
        auto cond = expression();
        SourceSpan span = cover(kw.span, cond->span);
        auto body = block();
        std::vector<StmtPtr> orelse;
        if (at_name("elif")) {
            orelse.push_back(if_statement());
        } else if (at_name("else")) {
            take();
            orelse = block();
        }
        return Stmt::if_(cond, std::move(body), std::move(orelse), span);
    }

    StmtPtr fill_statement() {
        const Token &kw = take();
        take();
        std::string hist;
        if (peek().kind == Tok::Name && !is_keyword(peek().text) && at_op(",", 1)) {
            hist = take().text;
            take();
        }
        std::vector<ExprPtr> args = arguments();
        const Token &close = previous();
        SourceSpan span = cover(kw.span, close.span);
        if (args.size() != 1) {
            std::size_t total = args.size() + (hist.empty() ? 0 : 1);
            fail(DiagnosticKind::Arity, span,
                 "fill_histogram takes (value) or (name, value), got " + std::to_string(total) + " arguments");
        }
        expect_newline();
        return Stmt::fill(hist, args.front(), span);
    }

    // Comma-separated expressions up to and including ')'; the '(' is already consumed.
    std::vector<ExprPtr> arguments() {
        std::vector<ExprPtr> args;
        if (at_op(")")) {
            take();
            return args;
        }
        while (true) {
            args.push_back(expression());
            if (at_op(",")) {
                take();
                continue;
            }
            expect_op(")");
            return args;
        }
    }

    ExprPtr expression() { return or_expr(); }

    ExprPtr or_expr() {
        auto lhs = and_expr();
        while (at_name("or")) {
            take();
            auto rhs = and_expr();
            lhs = Expr::binary(BinaryOp::Or, lhs, rhs, cover(lhs->span, rhs->span));
        }
        return lhs;
    }

    ExprPtr and_expr() {
        auto lhs = not_expr();
        while (at_name("and")) {
            take();
            auto rhs = not_expr();
            lhs = Expr::binary(BinaryOp::And, lhs, rhs, cover(lhs->span, rhs->span));
        }
        return lhs;
    }

    ExprPtr not_expr() {
        if (at_name("not")) {
            const Token &kw = take();
            auto operand = not_expr();
            return Expr::unary(UnaryOp::Not, operand, cover(kw.span, operand->span));
        }
        return comparison();
    }

    std::optional<BinaryOp> comparison_op() const {
        if (peek().kind != Tok::Op) return std::nullopt;
        const auto &t = peek().text;
        if (t == "<") return BinaryOp::Lt;
        if (t == ">") return BinaryOp::Gt;
        if (t == "<=") return BinaryOp::Le;
        if (t == ">=") return BinaryOp::Ge;
        if (t == "==") return BinaryOp::Eq;
        if (t == "!=") return BinaryOp::Ne;
        return std::nullopt;
    }

    ExprPtr comparison() {
        auto lhs = additive();
        if (at_name("is")) {
            take();
            bool negated = false;
            if (at_name("not")) {
                take();
                negated = true;
            }
            if (!at_name("None")) unexpected("'None' (only 'is None' and 'is not None' are supported)");
            const Token &none = take();
            lhs = Expr::is_none(lhs, negated, cover(lhs->span, none.span));
        } else if (auto op = comparison_op()) {
            take();
            auto rhs = additive();
            lhs = Expr::binary(*op, lhs, rhs, cover(lhs->span, rhs->span));
        } else {
            return lhs;
        }
        if (comparison_op() || at_name("is"))
            fail(DiagnosticKind::Syntax, peek().span, "chained comparisons are not supported; use 'and'");
        return lhs;
    }

    ExprPtr additive() {
        auto lhs = term();
        while (at_op("+") || at_op("-")) {
            auto op = take().text == "+" ? BinaryOp::Add : BinaryOp::Sub;
            auto rhs = term();
            lhs = Expr::binary(op, lhs, rhs, cover(lhs->span, rhs->span));
        }
        return lhs;
    }

    ExprPtr term() {
        auto lhs = unary();
        while (at_op("*") || at_op("/")) {
            auto op = take().text == "*" ? BinaryOp::Mul : BinaryOp::Div;
            auto rhs = unary();
            lhs = Expr::binary(op, lhs, rhs, cover(lhs->span, rhs->span));
        }
        return lhs;
    }

    ExprPtr unary() {
        if (at_op("-")) {
            const Token &minus = take();
            auto operand = unary();
            return Expr::unary(UnaryOp::Neg, operand, cover(minus.span, operand->span));
        }
        return postfix();
    }

    ExprPtr postfix() {
        auto e = atom();
        while (true) {
            if (at_op(".")) {
                take();
                const Token &field = expect_name("an attribute name");
                if (at_op("("))
                    fail(DiagnosticKind::UnknownFunction, field.span,
                         "method calls are not supported ('." + field.text + "(...)')");
                e = Expr::attr(e, field.text, cover(e->span, field.span));
            } else if (at_op("[")) {
                take();
                auto idx = expression();
                const Token &close = expect_op("]");
                e = Expr::index(e, idx, cover(e->span, close.span));
            } else {
                return e;
            }
        }
    }

    ExprPtr atom() {
        const Token &t = peek();
        switch (t.kind) {
        case Tok::Int: take(); return Expr::integer(t.int_value, t.span);
        case Tok::Float: take(); return Expr::floating(t.float_value, t.span);
        case Tok::Name:
            if (t.text == "None") {
                take();
                return Expr::none(t.span);
            }
            if (is_keyword(t.text)) unexpected("an expression");
            if (at_op("(", 1)) return call();
            take();
            return Expr::name(t.text, t.span);
        case Tok::Op:
            if (t.text == "(") {
                take();
                auto inner = expression();
                expect_op(")");
                return inner;
            }
            break;
        default: break;
        }
        unexpected("an expression");
    }

    ExprPtr call() {
        const Token &name = take();
        take();
        if (name.text == "range")
            fail(DiagnosticKind::Syntax, name.span, "range() is only valid as the iterable of a for loop");
        if (name.text == "fill_histogram")
            fail(DiagnosticKind::Syntax, name.span, "fill_histogram() is a statement, not an expression");
        auto fn = math_fn_from_name(name.text);
        if (!fn && name.text != "len")
            fail(DiagnosticKind::UnknownFunction, name.span,
                 "unknown function '" + name.text + "' (available: len, sqrt, cosh, cos, sin, exp, log, abs)");
        auto args = arguments();
        SourceSpan span = cover(name.span, previous().span);
        if (args.size() != 1)
            fail(DiagnosticKind::Arity, span,
                 name.text + "() takes exactly 1 argument, got " + std::to_string(args.size()));
        if (!fn) return Expr::len(args.front(), span);
        return Expr::call(*fn, std::move(args), span);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

QueryAst parse(std::string_view source) {
    return Parser(Lexer(source).run()).program();
}

}  // namespace flatq::lang
