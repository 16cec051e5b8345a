#include "flatq/compile/flat_program.hpp"

#include <algorithm>
#include <charconv>
#include <set>

namespace flatq::compile {

using columnar::ArrayRole;
using lang::BinaryOp;
using Op = FExpr::Op;

namespace {

bool is_slot(const FExpr &e, int slot) { return e.op == Op::SlotRef && e.slot == slot; }

bool is_child_begin(const FlatProgram &p, const FExpr &e, int parent) {
    return e.op == Op::Load && p.arrays[static_cast<std::size_t>(e.array)].role == ArrayRole::Offsets &&
           is_slot(*e.kids[0], parent);
}

bool is_child_end(const FExpr &e, int array, int parent) {
    if (e.op != Op::Load || e.array != array) return false;
    const FExpr &idx = *e.kids[0];
    return idx.op == Op::Binary && idx.bop == BinaryOp::Add && is_slot(*idx.kids[0], parent) &&
           idx.kids[1]->op == Op::ConstI64 && idx.kids[1]->i == 1;
}

// Only constants, arithmetic and attribute reads at `counter`.
bool reads_only_at(const FlatProgram &p, const FExpr &e, int counter) {
    switch (e.op) {
    case Op::ConstI64:
    case Op::ConstF64:
    case Op::ConstBool: return true;
    case Op::Load:
        return p.arrays[static_cast<std::size_t>(e.array)].role == ArrayRole::Attribute && is_slot(*e.kids[0], counter);
    case Op::ToF64:
    case Op::Binary:
    case Op::Unary:
    case Op::Call:
        return std::all_of(e.kids.begin(), e.kids.end(), [&](const FExprPtr &k) { return reads_only_at(p, *k, counter); });
    default: return false;
    }
}

bool is_counter(const FlatProgram &p, int slot) {
    return p.slots[static_cast<std::size_t>(slot)].role == Slot::Role::Counter;
}

FStmtPtr try_flatten(const FlatProgram &p, const FStmtPtr &root) {
    if (root->kind != FStmt::Kind::Loop || !is_counter(p, root->slot)) return nullptr;
    if (root->a->op != Op::ConstI64 || root->a->i != 0 || root->b->op != Op::NumEntries) return nullptr;

    std::vector<const FStmt *> levels{root.get()};
    const FStmt *cur = root.get();
    while (cur->body.size() == 1) {
        const FStmt &inner = *cur->body.front();
        if (inner.kind != FStmt::Kind::Loop || !is_counter(p, inner.slot)) break;
        if (!is_child_begin(p, *inner.a, cur->slot) || !is_child_end(*inner.b, inner.a->array, cur->slot)) break;
        levels.push_back(&inner);
        cur = &inner;
    }
    if (levels.size() < 2) return nullptr;
    if (cur->body.empty()) return nullptr;
    for (const auto &s : cur->body)
        if (s->kind != FStmt::Kind::Fill || !reads_only_at(p, *s->a, cur->slot)) return nullptr;

    // The innermost elements of entries [0, n) are [0, off_d[...off_1[n]]).
    FExprPtr bound = FExpr::num_entries();
    for (std::size_t k = 1; k < levels.size(); ++k) bound = FExpr::load(levels[k]->a->array, ValueType::I64, bound);
    return FStmt::loop(cur->slot, FExpr::const_i64(0), std::move(bound), cur->body);
}

void count_depth(const std::vector<FStmtPtr> &block, int depth, int &best) {
    for (const auto &s : block) {
        int d = depth + (s->kind == FStmt::Kind::Loop ? 1 : 0);
        best = std::max(best, d);
        count_depth(s->body, d, best);
        count_depth(s->orelse, d, best);
    }
}

// ---- listing ----

int precedence(const FExpr &e) {
    switch (e.op) {
    case Op::Binary:
        switch (e.bop) {
        case BinaryOp::Or: return 1;
        case BinaryOp::And: return 2;
        case BinaryOp::Eq:
        case BinaryOp::Ne: return 3;
        case BinaryOp::Lt:
        case BinaryOp::Gt:
        case BinaryOp::Le:
        case BinaryOp::Ge: return 4;
        case BinaryOp::Add:
        case BinaryOp::Sub: return 5;
        case BinaryOp::Mul:
        case BinaryOp::Div: return 6;
        }
        return 0;
    case Op::ElementIndex: return 5;
    case Op::Unary: return 7;
    default: return 8;
    }
}

std::string c_op(BinaryOp op) {
    switch (op) {
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
    default: return std::string(lang::to_string(op));
    }
}

std::string format_double(double v) {
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, r.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

class Printer {
public:
    explicit Printer(const FlatProgram &p) : p_(p) {}

    void expr(std::string &out, const FExpr &e) const {
        switch (e.op) {
        case Op::ConstI64: out += std::to_string(e.i); break;
        case Op::ConstF64: out += format_double(e.f); break;
        case Op::ConstBool: out += e.b ? "true" : "false"; break;
        case Op::SlotRef: out += p_.slots[static_cast<std::size_t>(e.slot)].name; break;
        case Op::NumEntries: out += "num_entries"; break;
        case Op::Load:
            out += p_.arrays[static_cast<std::size_t>(e.array)].path + "[";
            expr(out, *e.kids[0]);
            out += "]";
            break;
        case Op::ElementIndex:
            out += p_.arrays[static_cast<std::size_t>(e.array)].path + "[";
            expr(out, *e.kids[0]);
            out += "] + ";
            operand(out, *e.kids[1], 6);
            break;
        case Op::ToF64:
            out += "f64(";
            expr(out, *e.kids[0]);
            out += ")";
            break;
        case Op::Call:
            out += std::string(lang::to_string(e.fn)) + "(";
            expr(out, *e.kids[0]);
            out += ")";
            break;
        case Op::Unary:
            out += e.uop == lang::UnaryOp::Not ? "!" : "-";
            operand(out, *e.kids[0], 7);
            break;
        case Op::Binary: {
            int p = precedence(e);
            operand(out, *e.kids[0], p <= 4 && p >= 3 ? p + 1 : p);
            out += " " + c_op(e.bop) + " ";
            operand(out, *e.kids[1], p + 1);
            break;
        }
        }
    }

    void block(std::string &out, const std::vector<FStmtPtr> &stmts, int depth) const {
        for (const auto &s : stmts) stmt(out, *s, depth);
    }

private:
    void operand(std::string &out, const FExpr &e, int min_prec) const {
        bool paren = precedence(e) < min_prec;
        if (paren) out += "(";
        expr(out, e);
        if (paren) out += ")";
    }

    void stmt(std::string &out, const FStmt &s, int depth) const {
        std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
        out += pad;
        switch (s.kind) {
        case FStmt::Kind::Loop: {
            const auto &c = p_.slots[static_cast<std::size_t>(s.slot)].name;
            out += "for (" + c + " = ";
            expr(out, *s.a);
            out += "; " + c + " < ";
            expr(out, *s.b);
            out += "; " + c + "++) {\n";
            block(out, s.body, depth + 1);
            out += pad + "}\n";
            break;
        }
        case FStmt::Kind::Assign:
            out += p_.slots[static_cast<std::size_t>(s.slot)].name + " = ";
            expr(out, *s.a);
            out += ";\n";
            break;
        case FStmt::Kind::If:
            out += "if (";
            expr(out, *s.a);
            out += ") {\n";
            block(out, s.body, depth + 1);
            if (!s.orelse.empty()) {
                out += pad + "} else {\n";
                block(out, s.orelse, depth + 1);
            }
            out += pad + "}\n";
            break;
        case FStmt::Kind::Fill:
            out += "fill_histogram(" + p_.histograms[static_cast<std::size_t>(s.hist)] + ", ";
            expr(out, *s.a);
            out += ");\n";
            break;
        }
    }

    const FlatProgram &p_;
};

void used_slots(const FExpr &e, std::set<int> &out) {
    if (e.op == Op::SlotRef) out.insert(e.slot);
    for (const auto &k : e.kids) used_slots(*k, out);
}

void used_slots(const std::vector<FStmtPtr> &block, std::set<int> &out) {
    for (const auto &s : block) {
        if (s->slot >= 0) out.insert(s->slot);
        if (s->a) used_slots(*s->a, out);
        if (s->b) used_slots(*s->b, out);
        used_slots(s->body, out);
        used_slots(s->orelse, out);
    }
}

std::string_view role_name(Slot::Role r) {
    switch (r) {
    case Slot::Role::Counter: return "counter";
    case Slot::Role::Index: return "index";
    case Slot::Role::Scalar: return "scalar";
    }
    return "?";
}

}  // namespace

FlatProgram flatten(const FlatProgram &program) {
    FlatProgram out = program;
    out.body.clear();
    for (const auto &s : program.body) {
        if (auto flat = try_flatten(program, s)) {
            out.body.push_back(std::move(flat));
            out.flattened = true;
        } else {
            out.body.push_back(s);
        }
    }
    return out;
}

int loop_depth(const FlatProgram &program) {
    int best = 0;
    count_depth(program.body, 0, best);
    return best;
}

std::string print_ir_expr(const FlatProgram &program, const FExpr &expr) {
    std::string out;
    Printer(program).expr(out, expr);
    return out;
}

std::string print_ir(const FlatProgram &program) {
    std::string out;
    for (const auto &a : program.arrays)
        out += std::string("array ") + (a.role == ArrayRole::Offsets ? "offsets " : "attribute ") + a.path + " : " +
               std::string(columnar::to_string(a.dtype)) + "\n";
    std::set<int> used;
    used_slots(program.body, used);
    for (int s : used) {
        const auto &slot = program.slots[static_cast<std::size_t>(s)];
        out += "slot " + std::string(role_name(slot.role)) + " " + slot.name + " : " + std::string(to_string(slot.type)) + "\n";
    }
    for (const auto &h : program.histograms) out += "hist " + h + "\n";
    out += program.flattened ? "flattened true\n\n" : "flattened false\n\n";
    Printer(program).block(out, program.body, 0);
    return out;
}

}  // namespace flatq::compile
