#pragma once

#include "flatq/columnar/dataset.hpp"
#include "flatq/compile/types.hpp"
#include "flatq/lang/ast.hpp"

#include <memory>
#include <string>
#include <vector>

namespace flatq::compile {

enum class ValueType : std::uint8_t { I64, F64, Bool };

std::string_view to_string(ValueType t);

/// An array the program reads, by schema path.
struct ArrayRef {
    std::string path;
    columnar::ArrayRole role;
    columnar::PrimitiveKind dtype;

    friend bool operator==(const ArrayRef &, const ArrayRef &) = default;
};

/// A mutable program variable. Counters and record indices are I64.
struct Slot {
    enum class Role : std::uint8_t { Counter, Index, Scalar };

    std::string name;
    ValueType type;
    Role role;

    friend bool operator==(const Slot &, const Slot &) = default;
};

struct FExpr;
using FExprPtr = std::shared_ptr<const FExpr>;

/// IR expression. Operand layout by op:
///   ConstI64/ConstF64/ConstBool  i / f / b
///   SlotRef       slot
///   NumEntries    number of root entries
///   Load          array[kids[0]]
///   ElementIndex  offsets array: array[kids[0]] + kids[1], checked against array[kids[0] + 1]
///   ToF64         kids[0] is I64
///   Binary        bop, kids = {lhs, rhs} (operands have equal types)
///   Unary         uop, kids[0]
///   Call          fn, kids[0]
struct FExpr {
    enum class Op : std::uint8_t { ConstI64, ConstF64, ConstBool, SlotRef, NumEntries, Load, ElementIndex, ToF64, Binary, Unary, Call };

    Op op = Op::ConstI64;
    ValueType type = ValueType::I64;
    std::int64_t i = 0;
    double f = 0.0;
    bool b = false;
    int slot = -1;
    int array = -1;
    lang::BinaryOp bop = lang::BinaryOp::Add;
    lang::UnaryOp uop = lang::UnaryOp::Neg;
    lang::MathFn fn = lang::MathFn::Sqrt;
    std::vector<FExprPtr> kids;

    static FExprPtr const_i64(std::int64_t v);
    static FExprPtr const_f64(double v);
    static FExprPtr const_bool(bool v);
    static FExprPtr slot_ref(int slot, ValueType type);
    static FExprPtr num_entries();
    static FExprPtr load(int array, ValueType type, FExprPtr index);
    static FExprPtr element_index(int offsets, FExprPtr parent, FExprPtr i);
    static FExprPtr to_f64(FExprPtr v);
    static FExprPtr binary(lang::BinaryOp op, FExprPtr lhs, FExprPtr rhs);
    static FExprPtr unary(lang::UnaryOp op, FExprPtr v);
    static FExprPtr call(lang::MathFn fn, FExprPtr v);
};

struct FStmt;
using FStmtPtr = std::shared_ptr<const FStmt>;

/// IR statement:
///   Loop    for (slot = a; slot < b; slot++) body; `b` is evaluated once
///   Assign  slot = a
///   If      if (a) body else orelse
///   Fill    histogram `hist` += a (F64)
struct FStmt {
    enum class Kind : std::uint8_t { Loop, Assign, If, Fill };

    Kind kind = Kind::Assign;
    int slot = -1;
    int hist = -1;
    FExprPtr a;
    FExprPtr b;
    std::vector<FStmtPtr> body;
    std::vector<FStmtPtr> orelse;

    static FStmtPtr loop(int slot, FExprPtr begin, FExprPtr end, std::vector<FStmtPtr> body);
    static FStmtPtr assign(int slot, FExprPtr value);
    static FStmtPtr if_(FExprPtr cond, std::vector<FStmtPtr> body, std::vector<FStmtPtr> orelse);
    static FStmtPtr fill(int hist, FExprPtr value);
};

/**
 * A query lowered to flat loops over offsets and attribute arrays. Slots
 * start at zero (I64, F64) or false and keep their values across entries;
 * record and list references are entry indices into their arrays, with -1
 * standing for None.
 */
struct FlatProgram {
    columnar::Schema schema;
    std::vector<ArrayRef> arrays;
    std::vector<Slot> slots;
    std::vector<std::string> histograms;
    std::vector<FStmtPtr> body;
    bool flattened = false;
};

/// Lowers a typed query.
FlatProgram transform(const TypedQuery &query);

/**
 * Collapses perfectly nested loop chains whose innermost body only fills
 * histograms from innermost attributes into a single loop over the
 * innermost elements. Other statements are kept unchanged.
 */
FlatProgram flatten(const FlatProgram &program);

/// Human-readable listing: arrays, slots, histograms, then C-like loops.
std::string print_ir(const FlatProgram &program);

/// Expression in the listing syntax.
std::string print_ir_expr(const FlatProgram &program, const FExpr &expr);

/// Number of Loop statements on the deepest nesting path.
int loop_depth(const FlatProgram &program);

}  // namespace flatq::compile
