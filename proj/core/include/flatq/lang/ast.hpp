#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flatq::lang {

/// 1-based line and column range [col_begin, col_end) of a construct.
struct SourceSpan {
    int line = 0;
    int col_begin = 0;
    int col_end = 0;
};

enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Lt, Gt, Le, Ge, Eq, Ne, And, Or };
enum class UnaryOp : std::uint8_t { Neg, Not };
enum class MathFn : std::uint8_t { Sqrt, Cosh, Cos, Sin, Exp, Log, Abs };

std::string_view to_string(BinaryOp op);
std::string_view to_string(UnaryOp op);
std::string_view to_string(MathFn fn);
std::optional<MathFn> math_fn_from_name(std::string_view name);
bool is_comparison(BinaryOp op);
bool is_arithmetic(BinaryOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Expression node. Which members are meaningful depends on `kind`:
///   Name     text = identifier
///   Attr     text = field, operands = {base}
///   Index    operands = {list, index}
///   Len      operands = {list}
///   Binary   binary_op, operands = {lhs, rhs}
///   Unary    unary_op, operands = {operand}
///   Call     fn, operands = args
///   Number   is_int, int_value / float_value
///   None
///   IsNone   negated (`is not None`), operands = {value}
struct Expr {
    enum class Kind : std::uint8_t { Name, Attr, Index, Len, Binary, Unary, Call, Number, None, IsNone };

    Kind kind = Kind::None;
    SourceSpan span;
    std::string text;
    BinaryOp binary_op = BinaryOp::Add;
    UnaryOp unary_op = UnaryOp::Neg;
    MathFn fn = MathFn::Sqrt;
    bool is_int = false;
    std::int64_t int_value = 0;
    double float_value = 0.0;
    bool negated = false;
    std::vector<ExprPtr> operands;

    static ExprPtr name(std::string id, SourceSpan span = {});
    static ExprPtr attr(ExprPtr base, std::string field, SourceSpan span = {});
    static ExprPtr index(ExprPtr list, ExprPtr idx, SourceSpan span = {});
    static ExprPtr len(ExprPtr list, SourceSpan span = {});
    static ExprPtr binary(BinaryOp op, ExprPtr lhs, ExprPtr rhs, SourceSpan span = {});
    static ExprPtr unary(UnaryOp op, ExprPtr operand, SourceSpan span = {});
    static ExprPtr call(MathFn fn, std::vector<ExprPtr> args, SourceSpan span = {});
    static ExprPtr integer(std::int64_t value, SourceSpan span = {});
    static ExprPtr floating(double value, SourceSpan span = {});
    static ExprPtr none(SourceSpan span = {});
    static ExprPtr is_none(ExprPtr value, bool negated, SourceSpan span = {});
};

struct Stmt;
using StmtPtr = std::shared_ptr<const Stmt>;

/// Statement node:
///   ForEach   target = loop variable, first = iterable
///   ForRange  target = loop variable, first = start (may be null for `range(n)`), second = end
///   If        first = condition, body, orelse
///   Assign    target = variable, first = value
///   Fill      target = histogram name (empty for the single-argument form), first = value
struct Stmt {
    enum class Kind : std::uint8_t { ForEach, ForRange, If, Assign, Fill };

    Kind kind = Kind::Assign;
    SourceSpan span;
    std::string target;
    ExprPtr first;
    ExprPtr second;
    std::vector<StmtPtr> body;
    std::vector<StmtPtr> orelse;

    static StmtPtr for_each(std::string var, ExprPtr iterable, std::vector<StmtPtr> body, SourceSpan span = {});
    static StmtPtr for_range(std::string var, ExprPtr start, ExprPtr end, std::vector<StmtPtr> body,
                             SourceSpan span = {});
    static StmtPtr if_(ExprPtr cond, std::vector<StmtPtr> body, std::vector<StmtPtr> orelse, SourceSpan span = {});
    static StmtPtr assign(std::string var, ExprPtr value, SourceSpan span = {});
    static StmtPtr fill(std::string hist, ExprPtr value, SourceSpan span = {});
};

struct QueryAst {
    std::vector<StmtPtr> statements;
};

/// The identifier that names the whole dataset inside a query.
inline constexpr std::string_view kDatasetName = "dataset";

// Structural equality; source spans are ignored, float literals compare bitwise.
bool operator==(const Expr &a, const Expr &b);
bool operator==(const Stmt &a, const Stmt &b);
bool operator==(const QueryAst &a, const QueryAst &b);

}  // namespace flatq::lang
