#include "flatq/exec/engine.hpp"

#include "exec/arith.hpp"
#include "exec/common.hpp"

#include <memory>

namespace flatq::exec {

using columnar::ArrayRole;
using columnar::PrimitiveKind;
using compile::FExpr;
using compile::FStmt;
using compile::ValueType;
using lang::BinaryOp;

namespace {

// Opcodes are specialised by result type so evaluation never inspects types.
enum class Code : std::uint8_t {
    ConstI, SlotI, NumEntries, LoadI64, LoadI64AtSlot, LoadI64AfterSlot, LoadU8, ElemIdx, AddI, SubI, MulI, NegI, AbsI,
    ConstF, SlotF, LoadF64, LoadF64AtSlot, ToF, AddF, SubF, MulF, DivF, NegF, CallF,
    ConstB, SlotB, CmpI, CmpF, CmpB, And, Or, Not,
};

struct Node {
    Code code = Code::ConstI;
    BinaryOp op = BinaryOp::Add;
    lang::MathFn fn = lang::MathFn::Sqrt;
    std::size_t slot = 0;
    std::int64_t ci = 0;
    double cf = 0.0;
    bool cb = false;
    const double *f64 = nullptr;
    const std::int64_t *i64 = nullptr;
    const std::uint8_t *u8 = nullptr;
    const Node *a = nullptr;
    const Node *b = nullptr;
};

struct SNode {
    FStmt::Kind kind = FStmt::Kind::Assign;
    std::size_t slot = 0;
    ValueType slot_type = ValueType::I64;
    const Node *a = nullptr;
    const Node *b = nullptr;
    std::vector<const SNode *> body;
    std::vector<const SNode *> orelse;
    int hist = -1;
    // Loop whose whole body is fill(hist, array[counter]).
    const double *fast_fill = nullptr;
};

struct Machine {
    std::vector<std::int64_t> i;
    std::vector<double> f;
    std::vector<std::uint8_t> b;
    std::int64_t num_entries = 0;
    std::vector<Histogram *> hists;
    FillTrace *trace = nullptr;

    std::int64_t eval_i(const Node &n);
    double eval_f(const Node &n);
    bool eval_b(const Node &n);
    void exec(const SNode &s);
    void exec(const std::vector<const SNode *> &block) {
        for (const SNode *s : block) exec(*s);
    }
};

std::int64_t Machine::eval_i(const Node &n) {
    switch (n.code) {
    case Code::ConstI: return n.ci;
    case Code::SlotI: return i[n.slot];
    case Code::NumEntries: return num_entries;
    case Code::LoadI64: return n.i64[eval_i(*n.a)];
    case Code::LoadI64AtSlot: return n.i64[i[n.slot]];
    case Code::LoadI64AfterSlot: return n.i64[i[n.slot] + 1];
    case Code::LoadU8: return n.u8[eval_i(*n.a)];
    case Code::ElemIdx: {
        std::int64_t parent = eval_i(*n.a);
        std::int64_t k = eval_i(*n.b);
        std::int64_t begin = n.i64[parent], end = n.i64[parent + 1];
        if (k < 0 || k >= end - begin) throw_index_error(k, end - begin);
        return begin + k;
    }
    case Code::AddI: return arith::add(eval_i(*n.a), eval_i(*n.b));
    case Code::SubI: return arith::sub(eval_i(*n.a), eval_i(*n.b));
    case Code::MulI: return arith::mul(eval_i(*n.a), eval_i(*n.b));
    case Code::NegI: return arith::neg(eval_i(*n.a));
    case Code::AbsI: return arith::abs(eval_i(*n.a));
    default: break;
    }
    throw std::logic_error("not an integer opcode");
}

double Machine::eval_f(const Node &n) {
    switch (n.code) {
    case Code::ConstF: return n.cf;
    case Code::SlotF: return f[n.slot];
    case Code::LoadF64: return n.f64[eval_i(*n.a)];
    case Code::LoadF64AtSlot: return n.f64[i[n.slot]];
    case Code::ToF: return arith::to_f64(eval_i(*n.a));
    case Code::AddF: {
        double x = eval_f(*n.a);
        return x + eval_f(*n.b);
    }
    case Code::SubF: {
        double x = eval_f(*n.a);
        return x - eval_f(*n.b);
    }
    case Code::MulF: {
        double x = eval_f(*n.a);
        return x * eval_f(*n.b);
    }
    case Code::DivF: {
        double x = eval_f(*n.a);
        return x / eval_f(*n.b);
    }
    case Code::NegF: return -eval_f(*n.a);
    case Code::CallF: return arith::call(n.fn, eval_f(*n.a));
    default: break;
    }
    throw std::logic_error("not a float opcode");
}

bool Machine::eval_b(const Node &n) {
    switch (n.code) {
    case Code::ConstB: return n.cb;
    case Code::SlotB: return b[n.slot] != 0;
    case Code::CmpI: {
        std::int64_t x = eval_i(*n.a);
        return arith::compare(n.op, x, eval_i(*n.b));
    }
    case Code::CmpF: {
        double x = eval_f(*n.a);
        return arith::compare(n.op, x, eval_f(*n.b));
    }
    case Code::CmpB: {
        bool x = eval_b(*n.a);
        return arith::compare(n.op, x, eval_b(*n.b));
    }
    case Code::And: return eval_b(*n.a) && eval_b(*n.b);
    case Code::Or: return eval_b(*n.a) || eval_b(*n.b);
    case Code::Not: return !eval_b(*n.a);
    default: break;
    }
    throw std::logic_error("not a boolean opcode");
}

void Machine::exec(const SNode &s) {
    switch (s.kind) {
    case FStmt::Kind::Loop: {
        std::int64_t begin = eval_i(*s.a);
        std::int64_t end = eval_i(*s.b);
        if (s.fast_fill) {
            Histogram &h = *hists[static_cast<std::size_t>(s.hist)];
            if (trace) {
                for (std::int64_t k = begin; k < end; ++k) {
                    h.fill(s.fast_fill[k]);
                    trace->push_back({s.hist, s.fast_fill[k]});
                }
            } else {
                for (std::int64_t k = begin; k < end; ++k) h.fill(s.fast_fill[k]);
            }
            if (begin < end) i[s.slot] = end - 1;
            break;
        }
        for (std::int64_t k = begin; k < end; ++k) {
            i[s.slot] = k;
            exec(s.body);
        }
        break;
    }
    case FStmt::Kind::Assign:
        switch (s.slot_type) {
        case ValueType::I64: i[s.slot] = eval_i(*s.a); break;
        case ValueType::F64: f[s.slot] = eval_f(*s.a); break;
        case ValueType::Bool: b[s.slot] = eval_b(*s.a); break;
        }
        break;
    case FStmt::Kind::If:
        if (eval_b(*s.a)) exec(s.body);
        else exec(s.orelse);
        break;
    case FStmt::Kind::Fill: {
        double x = eval_f(*s.a);
        hists[static_cast<std::size_t>(s.hist)]->fill(x);
        if (trace) trace->push_back({s.hist, x});
        break;
    }
    }
}

struct BoundArray {
    const double *f64 = nullptr;
    const std::int64_t *i64 = nullptr;
    const std::uint8_t *u8 = nullptr;
};

class Binder {
public:
    Binder(const compile::FlatProgram &p, const columnar::ColumnarDataset &ds) : p_(p) {
        if (!(p.schema == ds.schema())) throw ProgramMismatchError("program was compiled for a different schema");
        for (const auto &a : p.arrays) {
            BoundArray bound;
            if (a.role == ArrayRole::Offsets) {
                if (!ds.has_offsets(a.path)) throw ProgramMismatchError("dataset has no offsets array '" + a.path + "'");
                bound.i64 = ds.offsets(a.path).data();
            } else {
                if (!ds.has_attribute(a.path)) throw ProgramMismatchError("dataset has no attribute array '" + a.path + "'");
                const auto &col = ds.attribute(a.path);
                if (columnar::column_kind(col) != a.dtype)
                    throw ProgramMismatchError("attribute array '" + a.path + "' has the wrong element type");
                std::visit(
                    [&](const auto &v) {
                        using T = typename std::decay_t<decltype(v)>::value_type;
                        if constexpr (std::is_same_v<T, double>) bound.f64 = v.data();
                        else if constexpr (std::is_same_v<T, std::int64_t>) bound.i64 = v.data();
                        else bound.u8 = v.data();
                    },
                    col);
            }
            arrays_.push_back(bound);
        }
    }

    std::vector<const SNode *> block(const std::vector<compile::FStmtPtr> &stmts) {
        std::vector<const SNode *> out;
        for (const auto &s : stmts) out.push_back(stmt(*s));
        return out;
    }

private:
    Node *node() { return nodes_.emplace_back(std::make_unique<Node>()).get(); }

    const Node *expr(const FExpr &e) {
        Node *n = node();
        auto kid = [&](std::size_t k) { return expr(*e.kids[k]); };
        switch (e.op) {
        case FExpr::Op::ConstI64: n->code = Code::ConstI; n->ci = e.i; break;
        case FExpr::Op::ConstF64: n->code = Code::ConstF; n->cf = e.f; break;
        case FExpr::Op::ConstBool: n->code = Code::ConstB; n->cb = e.b; break;
        case FExpr::Op::SlotRef:
            n->slot = static_cast<std::size_t>(e.slot);
            n->code = e.type == ValueType::I64 ? Code::SlotI : e.type == ValueType::F64 ? Code::SlotF : Code::SlotB;
            break;
        case FExpr::Op::NumEntries: n->code = Code::NumEntries; break;
        case FExpr::Op::Load: {
            const auto &arr = arrays_[static_cast<std::size_t>(e.array)];
            n->a = kid(0);
            if (arr.f64) {
                n->code = Code::LoadF64;
                n->f64 = arr.f64;
            } else if (arr.u8) {
                n->code = Code::LoadU8;
                n->u8 = arr.u8;
            } else {
                n->code = Code::LoadI64;
                n->i64 = arr.i64;
            }
            fuse_load(*n, *e.kids[0]);
            break;
        }
        case FExpr::Op::ElementIndex:
            n->code = Code::ElemIdx;
            n->i64 = arrays_[static_cast<std::size_t>(e.array)].i64;
            n->a = kid(0);
            n->b = kid(1);
            break;
        case FExpr::Op::ToF64: n->code = Code::ToF; n->a = kid(0); break;
        case FExpr::Op::Unary:
            n->a = kid(0);
            if (e.uop == lang::UnaryOp::Not) n->code = Code::Not;
            else n->code = e.type == ValueType::I64 ? Code::NegI : Code::NegF;
            break;
        case FExpr::Op::Call:
            n->a = kid(0);
            n->fn = e.fn;
            n->code = e.type == ValueType::I64 ? Code::AbsI : Code::CallF;
            break;
        case FExpr::Op::Binary: {
            n->a = kid(0);
            n->b = kid(1);
            n->op = e.bop;
            ValueType operands = e.kids[0]->type;
            if (e.bop == BinaryOp::And) n->code = Code::And;
            else if (e.bop == BinaryOp::Or) n->code = Code::Or;
            else if (lang::is_comparison(e.bop))
                n->code = operands == ValueType::I64 ? Code::CmpI : operands == ValueType::F64 ? Code::CmpF : Code::CmpB;
            else if (operands == ValueType::I64)
                n->code = e.bop == BinaryOp::Add ? Code::AddI : e.bop == BinaryOp::Sub ? Code::SubI : Code::MulI;
            else
                n->code = e.bop == BinaryOp::Add   ? Code::AddF
                          : e.bop == BinaryOp::Sub ? Code::SubF
                          : e.bop == BinaryOp::Mul ? Code::MulF
                                                   : Code::DivF;
            break;
        }
        }
        return n;
    }

    // Loads indexed by a slot, or a slot plus one, skip the index subtree.
    static void fuse_load(Node &n, const FExpr &idx) {
        using compile::FExpr;
        const FExpr *slot = nullptr;
        bool after = false;
        if (idx.op == FExpr::Op::SlotRef) {
            slot = &idx;
        } else if (idx.op == FExpr::Op::Binary && idx.bop == BinaryOp::Add && idx.kids[0]->op == FExpr::Op::SlotRef &&
                   idx.kids[1]->op == FExpr::Op::ConstI64 && idx.kids[1]->i == 1) {
            slot = idx.kids[0].get();
            after = true;
        }
        if (!slot) return;
        if (n.code == Code::LoadF64 && !after) n.code = Code::LoadF64AtSlot;
        else if (n.code == Code::LoadI64) n.code = after ? Code::LoadI64AfterSlot : Code::LoadI64AtSlot;
        else return;
        n.slot = static_cast<std::size_t>(slot->slot);
    }

    const SNode *stmt(const FStmt &s) {
        SNode *n = snodes_.emplace_back(std::make_unique<SNode>()).get();
        n->kind = s.kind;
        n->hist = s.hist;
        if (s.slot >= 0) {
            n->slot = static_cast<std::size_t>(s.slot);
            n->slot_type = p_.slots[n->slot].type;
        }
        if (s.a) n->a = expr(*s.a);
        if (s.b) n->b = expr(*s.b);
        n->body = block(s.body);
        n->orelse = block(s.orelse);
        if (s.kind == FStmt::Kind::Loop && s.body.size() == 1 && s.body[0]->kind == FStmt::Kind::Fill) {
            const FExpr &v = *s.body[0]->a;
            if (v.op == FExpr::Op::Load && v.kids[0]->op == FExpr::Op::SlotRef && v.kids[0]->slot == s.slot) {
                const auto &arr = arrays_[static_cast<std::size_t>(v.array)];
                if (arr.f64) {
                    n->fast_fill = arr.f64;
                    n->hist = s.body[0]->hist;
                }
            }
        }
        return n;
    }

    const compile::FlatProgram &p_;
    std::vector<BoundArray> arrays_;
    std::vector<std::unique_ptr<Node>> nodes_;
    std::vector<std::unique_ptr<SNode>> snodes_;
};

}  // namespace

HistogramMap run_flat(const compile::FlatProgram &program, const columnar::ColumnarDataset &dataset,
                      const std::vector<HistogramSpec> &specs, FillTrace *trace) {
    Binder binder(program, dataset);
    auto body = binder.block(program.body);

    HistogramMap out = make_histograms(specs);
    Machine m;
    m.hists = bind_histograms(out, program.histograms);
    m.i.assign(program.slots.size(), 0);
    m.f.assign(program.slots.size(), 0.0);
    m.b.assign(program.slots.size(), 0);
    m.num_entries = dataset.num_entries();
    m.trace = trace;
    m.exec(body);
    return out;
}

}  // namespace flatq::exec
