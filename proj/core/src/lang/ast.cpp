#include "flatq/lang/ast.hpp"
#include "flatq/lang/diagnostic.hpp"

#include <algorithm>
#include <bit>

namespace flatq::lang {

std::string_view to_string(BinaryOp op) {
    switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::And: return "and";
    case BinaryOp::Or: return "or";
    }
    return "?";
}

std::string_view to_string(UnaryOp op) { return op == UnaryOp::Neg ? "-" : "not"; }

std::string_view to_string(MathFn fn) {
    switch (fn) {
    case MathFn::Sqrt: return "sqrt";
    case MathFn::Cosh: return "cosh";
    case MathFn::Cos: return "cos";
    case MathFn::Sin: return "sin";
    case MathFn::Exp: return "exp";
    case MathFn::Log: return "log";
    case MathFn::Abs: return "abs";
    }
    return "?";
}

std::optional<MathFn> math_fn_from_name(std::string_view name) {
    for (auto fn : {MathFn::Sqrt, MathFn::Cosh, MathFn::Cos, MathFn::Sin, MathFn::Exp, MathFn::Log, MathFn::Abs})
        if (to_string(fn) == name) return fn;
    return std::nullopt;
}

bool is_comparison(BinaryOp op) {
    return op == BinaryOp::Lt || op == BinaryOp::Gt || op == BinaryOp::Le || op == BinaryOp::Ge ||
           op == BinaryOp::Eq || op == BinaryOp::Ne;
}

bool is_arithmetic(BinaryOp op) {
    return op == BinaryOp::Add || op == BinaryOp::Sub || op == BinaryOp::Mul || op == BinaryOp::Div;
}

namespace {

std::shared_ptr<Expr> make(Expr::Kind kind, SourceSpan span) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->span = span;
    return e;
}

std::shared_ptr<Stmt> make(Stmt::Kind kind, SourceSpan span) {
    auto s = std::make_shared<Stmt>();
    s->kind = kind;
    s->span = span;
    return s;
}

bool same(const ExprPtr &a, const ExprPtr &b) {
    if (!a || !b) return !a && !b;
    return *a == *b;
}

bool same(const std::vector<StmtPtr> &a, const std::vector<StmtPtr> &b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (!(*a[i] == *b[i])) return false;
    return true;
}

}  // namespace

ExprPtr Expr::name(std::string id, SourceSpan span) {
    auto e = make(Kind::Name, span);
    e->text = std::move(id);
    return e;
}

ExprPtr Expr::attr(ExprPtr base, std::string field, SourceSpan span) {
    auto e = make(Kind::Attr, span);
    e->text = std::move(field);
    e->operands = {std::move(base)};
    return e;
}

ExprPtr Expr::index(ExprPtr list, ExprPtr idx, SourceSpan span) {
    auto e = make(Kind::Index, span);
    e->operands = {std::move(list), std::move(idx)};
    return e;
}

ExprPtr Expr::len(ExprPtr list, SourceSpan span) {
    auto e = make(Kind::Len, span);
    e->operands = {std::move(list)};
    return e;
}

ExprPtr Expr::binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span) {
    auto e = make(Kind::Binary, span);
    e->binary_op = op;
    e->operands = {std::move(lhs), std::move(rhs)};
    return e;
}

ExprPtr Expr::unary(UnaryOp op, ExprPtr operand, SourceSpan span) {
    auto e = make(Kind::Unary, span);
    e->unary_op = op;
    e->operands = {std::move(operand)};
    return e;
}

ExprPtr Expr::call(MathFn fn, std::vector<ExprPtr> args, SourceSpan span) {
    auto e = make(Kind::Call, span);
    e->fn = fn;
    e->operands = std::move(args);
    return e;
}

ExprPtr Expr::integer(std::int64_t value, SourceSpan span) {
    auto e = make(Kind::Number, span);
    e->is_int = true;
    e->int_value = value;
    return e;
}

ExprPtr Expr::floating(double value, SourceSpan span) {
    auto e = make(Kind::Number, span);
    e->float_value = value;
    return e;
}

ExprPtr Expr::none(SourceSpan span) { return make(Kind::None, span); }

ExprPtr Expr::is_none(ExprPtr value, bool negated, SourceSpan span) {
    auto e = make(Kind::IsNone, span);
    e->negated = negated;
    e->operands = {std::move(value)};
    return e;
}

StmtPtr Stmt::for_each(std::string var, ExprPtr iterable, std::vector<StmtPtr> body, SourceSpan span) {
    auto s = make(Kind::ForEach, span);
    s->target = std::move(var);
    s->first = std::move(iterable);
    s->body = std::move(body);
    return s;
}

StmtPtr Stmt::for_range(std::string var, ExprPtr start, ExprPtr end, std::vector<StmtPtr> body, SourceSpan span) {
    auto s = make(Kind::ForRange, span);
    s->target = std::move(var);
    s->first = std::move(start);
    s->second = std::move(end);
    s->body = std::move(body);
    return s;
}

StmtPtr Stmt::if_(ExprPtr cond, std::vector<StmtPtr> body, std::vector<StmtPtr> orelse, SourceSpan span) {
    auto s = make(Kind::If, span);
    s->first = std::move(cond);
    s->body = std::move(body);
    s->orelse = std::move(orelse);
    return s;
}

StmtPtr Stmt::assign(std::string var, ExprPtr value, SourceSpan span) {
    auto s = make(Kind::Assign, span);
    s->target = std::move(var);
    s->first = std::move(value);
    return s;
}

StmtPtr Stmt::fill(std::string hist, ExprPtr value, SourceSpan span) {
    auto s = make(Kind::Fill, span);
    s->target = std::move(hist);
    s->first = std::move(value);
    return s;
}

bool operator==(const Expr &a, const Expr &b) {
    if (a.kind != b.kind || a.operands.size() != b.operands.size()) return false;
    switch (a.kind) {
    case Expr::Kind::Name:
    case Expr::Kind::Attr:
        if (a.text != b.text) return false;
        break;
    case Expr::Kind::Binary:
        if (a.binary_op != b.binary_op) return false;
        break;
    case Expr::Kind::Unary:
        if (a.unary_op != b.unary_op) return false;
        break;
    case Expr::Kind::Call:
        if (a.fn != b.fn) return false;
        break;
    case Expr::Kind::Number:
        if (a.is_int != b.is_int) return false;
        if (a.is_int ? a.int_value != b.int_value
                     : std::bit_cast<std::uint64_t>(a.float_value) != std::bit_cast<std::uint64_t>(b.float_value))
            return false;
        break;
    case Expr::Kind::IsNone:
        if (a.negated != b.negated) return false;
        break;
    default: break;
    }
    for (std::size_t i = 0; i < a.operands.size(); ++i)
        if (!same(a.operands[i], b.operands[i])) return false;
    return true;
}

bool operator==(const Stmt &a, const Stmt &b) {
    return a.kind == b.kind && a.target == b.target && same(a.first, b.first) && same(a.second, b.second) &&
           same(a.body, b.body) && same(a.orelse, b.orelse);
}

bool operator==(const QueryAst &a, const QueryAst &b) { return same(a.statements, b.statements); }

std::string_view to_string(DiagnosticKind kind) {
    switch (kind) {
    case DiagnosticKind::Lex: return "lex";
    case DiagnosticKind::Indentation: return "indentation";
    case DiagnosticKind::Syntax: return "syntax";
    case DiagnosticKind::UnknownFunction: return "unknown-function";
    case DiagnosticKind::Arity: return "arity";
    case DiagnosticKind::Type: return "type";
    }
    return "?";
}

std::string Diagnostic::format() const {
    return std::to_string(span.line) + ":" + std::to_string(span.col_begin) + ": " + std::string(to_string(kind)) +
           " error: " + message;
}

std::string render(const Diagnostic &d, std::string_view source, std::string_view origin) {
    std::string out = std::string(origin) + ":" + d.format() + "\n";
    std::string_view rest = source;
    for (int line = 1; line < d.span.line && !rest.empty(); ++line) {
        auto nl = rest.find('\n');
        rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    }
    if (d.span.line < 1 || rest.empty()) return out;
    std::string_view text = rest.substr(0, rest.find('\n'));
    out += "  " + std::string(text) + "\n  ";
    int begin = std::max(1, d.span.col_begin);
    int end = std::max(begin + 1, d.span.col_end);
    out += std::string(static_cast<std::size_t>(begin - 1), ' ') + std::string(static_cast<std::size_t>(end - begin), '^') + "\n";
    return out;
}

}  // namespace flatq::lang
