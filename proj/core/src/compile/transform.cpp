#include "flatq/compile/flat_program.hpp"

#include <map>
#include <set>

namespace flatq::compile {

using columnar::ArrayRole;
using columnar::PrimitiveKind;
using lang::BinaryOp;
using lang::Expr;
using lang::Stmt;
using lang::StmtPtr;
using Kind = InferredType::Kind;

std::string_view to_string(ValueType t) {
    switch (t) {
    case ValueType::I64: return "i64";
    case ValueType::F64: return "f64";
    case ValueType::Bool: return "bool";
    }
    return "?";
}

namespace {

std::shared_ptr<FExpr> make(FExpr::Op op, ValueType type) {
    auto e = std::make_shared<FExpr>();
    e->op = op;
    e->type = type;
    return e;
}

}  // namespace

FExprPtr FExpr::const_i64(std::int64_t v) {
    auto e = make(Op::ConstI64, ValueType::I64);
    e->i = v;
    return e;
}

FExprPtr FExpr::const_f64(double v) {
    auto e = make(Op::ConstF64, ValueType::F64);
    e->f = v;
    return e;
}

FExprPtr FExpr::const_bool(bool v) {
    auto e = make(Op::ConstBool, ValueType::Bool);
    e->b = v;
    return e;
}

FExprPtr FExpr::slot_ref(int slot, ValueType type) {
    auto e = make(Op::SlotRef, type);
    e->slot = slot;
    return e;
}

FExprPtr FExpr::num_entries() { return make(Op::NumEntries, ValueType::I64); }

FExprPtr FExpr::load(int array, ValueType type, FExprPtr index) {
    auto e = make(Op::Load, type);
    e->array = array;
    e->kids = {std::move(index)};
    return e;
}

FExprPtr FExpr::element_index(int offsets, FExprPtr parent, FExprPtr i) {
    auto e = make(Op::ElementIndex, ValueType::I64);
    e->array = offsets;
    e->kids = {std::move(parent), std::move(i)};
    return e;
}

FExprPtr FExpr::to_f64(FExprPtr v) {
    if (v->type == ValueType::F64) return v;
    if (v->op == Op::ConstI64) return const_f64(static_cast<double>(v->i));
    auto e = make(Op::ToF64, ValueType::F64);
    e->kids = {std::move(v)};
    return e;
}

FExprPtr FExpr::binary(lang::BinaryOp op, FExprPtr lhs, FExprPtr rhs) {
    bool logical = lang::is_comparison(op) || op == BinaryOp::And || op == BinaryOp::Or;
    auto e = make(Op::Binary, logical ? ValueType::Bool : lhs->type);
    e->bop = op;
    e->kids = {std::move(lhs), std::move(rhs)};
    return e;
}

FExprPtr FExpr::unary(lang::UnaryOp op, FExprPtr v) {
    auto e = make(Op::Unary, v->type);
    e->uop = op;
    e->kids = {std::move(v)};
    return e;
}

FExprPtr FExpr::call(lang::MathFn fn, FExprPtr v) {
    auto e = make(Op::Call, fn == lang::MathFn::Abs ? v->type : ValueType::F64);
    e->fn = fn;
    e->kids = {std::move(v)};
    return e;
}

FStmtPtr FStmt::loop(int slot, FExprPtr begin, FExprPtr end, std::vector<FStmtPtr> body) {
    auto s = std::make_shared<FStmt>();
    s->kind = Kind::Loop;
    s->slot = slot;
    s->a = std::move(begin);
    s->b = std::move(end);
    s->body = std::move(body);
    return s;
}

FStmtPtr FStmt::assign(int slot, FExprPtr value) {
    auto s = std::make_shared<FStmt>();
    s->kind = Kind::Assign;
    s->slot = slot;
    s->a = std::move(value);
    return s;
}

FStmtPtr FStmt::if_(FExprPtr cond, std::vector<FStmtPtr> body, std::vector<FStmtPtr> orelse) {
    auto s = std::make_shared<FStmt>();
    s->kind = Kind::If;
    s->a = std::move(cond);
    s->body = std::move(body);
    s->orelse = std::move(orelse);
    return s;
}

FStmtPtr FStmt::fill(int hist, FExprPtr value) {
    auto s = std::make_shared<FStmt>();
    s->kind = Kind::Fill;
    s->hist = hist;
    s->a = std::move(value);
    return s;
}

namespace {

ValueType value_type(const InferredType &t) {
    switch (t.kind) {
    case Kind::F64: return ValueType::F64;
    case Kind::Bool: return ValueType::Bool;
    default: return ValueType::I64;
    }
}

ValueType value_type(PrimitiveKind k) { return k == PrimitiveKind::Float64 ? ValueType::F64 : ValueType::I64; }

class Lowering {
public:
    explicit Lowering(const TypedQuery &q) : q_(q), prog_{q.schema, {}, {}, q.histograms, {}, false} {
        collect_user_names(q.ast.statements);
        var_slot_.assign(q.vars.size(), -1);
        for (std::size_t v = 0; v < q.vars.size(); ++v) {
            const auto &info = q.vars[v];
            if (info.role == VarInfo::Role::Assigned) {
                var_slot_[v] = slot(info.name, value_type(info.type),
                                    info.type.is_object() ? Slot::Role::Index : Slot::Role::Scalar);
            } else if (info.role == VarInfo::Role::ForRange) {
                var_slot_[v] = slot(info.name, ValueType::I64, Slot::Role::Counter);
            }
        }
    }

    FlatProgram run() {
        prog_.body = block(q_.ast.statements);
        return std::move(prog_);
    }

private:
    void collect_user_names(const std::vector<StmtPtr> &block) {
        for (const auto &s : block) {
            if (s->kind != Stmt::Kind::Fill && s->kind != Stmt::Kind::If) user_names_.insert(s->target);
            collect_user_names(s->body);
            collect_user_names(s->orelse);
        }
    }

    int slot(const std::string &name, ValueType type, Slot::Role role) {
        auto it = slot_by_name_.find(name);
        if (it != slot_by_name_.end()) return it->second;
        prog_.slots.push_back(Slot{name, type, role});
        int id = static_cast<int>(prog_.slots.size()) - 1;
        slot_by_name_[name] = id;
        return id;
    }

    int counter_slot(int depth) {
        static constexpr std::string_view kNames = "ijklmnpqrstuvw";
        int k = 0;
        for (char c : kNames) {
            std::string n(1, c);
            if (user_names_.count(n)) continue;
            if (k++ == depth) return slot(n, ValueType::I64, Slot::Role::Counter);
        }
        std::string n = "c" + std::to_string(depth);
        while (user_names_.count(n)) n += "_";
        return slot(n, ValueType::I64, Slot::Role::Counter);
    }

    int array(const std::string &path, ArrayRole role, PrimitiveKind dtype) {
        auto key = std::make_pair(path, role);
        auto it = array_ids_.find(key);
        if (it != array_ids_.end()) return it->second;
        prog_.arrays.push_back(ArrayRef{path, role, dtype});
        int id = static_cast<int>(prog_.arrays.size()) - 1;
        array_ids_[key] = id;
        return id;
    }

    int offsets(const std::string &list_path) { return array(list_path, ArrayRole::Offsets, PrimitiveKind::Int64); }

    FExprPtr load_attr(const std::string &path, PrimitiveKind k, FExprPtr index) {
        return FExpr::load(array(path, ArrayRole::Attribute, k), value_type(k), std::move(index));
    }

    FExprPtr var_ref(const Expr &name) {
        int v = q_.name_vars.at(&name);
        return FExpr::slot_ref(var_slot_.at(static_cast<std::size_t>(v)), ValueType::I64);
    }

    // Index of the list or record an object-valued expression denotes.
    FExprPtr ref(const Expr &e) {
        switch (e.kind) {
        case Expr::Kind::Name: return var_ref(e);
        case Expr::Kind::None: return FExpr::const_i64(-1);
        case Expr::Kind::Attr: return ref(*e.operands[0]);
        case Expr::Kind::Index: {
            const auto &list = q_.type_of(*e.operands[0]);
            return FExpr::element_index(offsets(list.path), ref(*e.operands[0]), value(*e.operands[1]));
        }
        default: throw std::logic_error("expression has no object reference");
        }
    }

    FExprPtr list_begin(const InferredType &list, const FExprPtr &r) { return FExpr::load(offsets(list.path), ValueType::I64, r); }
    FExprPtr list_end(const InferredType &list, const FExprPtr &r) {
        return FExpr::load(offsets(list.path), ValueType::I64, FExpr::binary(BinaryOp::Add, r, FExpr::const_i64(1)));
    }

    static FExprPtr coerce(FExprPtr v, ValueType to) { return to == ValueType::F64 ? FExpr::to_f64(std::move(v)) : v; }

    FExprPtr value(const Expr &e) {
        const InferredType &t = q_.type_of(e);
        switch (e.kind) {
        case Expr::Kind::Name: {
            int v = q_.name_vars.at(&e);
            auto prim = prim_elems_.find(v);
            if (prim != prim_elems_.end())
                return load_attr(prim->second.first, prim->second.second,
                                 FExpr::slot_ref(var_slot_[static_cast<std::size_t>(v)], ValueType::I64));
            return FExpr::slot_ref(var_slot_.at(static_cast<std::size_t>(v)), value_type(t));
        }
        case Expr::Kind::Attr: {
            const auto &base = q_.type_of(*e.operands[0]);
            const auto &field = base.node->fields()[static_cast<std::size_t>(q_.attr_fields.at(&e))];
            return load_attr(columnar::join_path(base.path, field.name), field.type->primitive_kind(), ref(*e.operands[0]));
        }
        case Expr::Kind::Index: {
            const auto &list = q_.type_of(*e.operands[0]);
            const auto &item = list.node->item();
            return load_attr(columnar::item_path(list.path, item), item.primitive_kind(), ref(e));
        }
        case Expr::Kind::Len: {
            const auto &list = q_.type_of(*e.operands[0]);
            if (list.kind == Kind::Dataset) return FExpr::num_entries();
            auto r = ref(*e.operands[0]);
            return FExpr::binary(BinaryOp::Sub, list_end(list, r), list_begin(list, r));
        }
        case Expr::Kind::Number: return e.is_int ? FExpr::const_i64(e.int_value) : FExpr::const_f64(e.float_value);
        case Expr::Kind::IsNone:
            return FExpr::binary(e.negated ? BinaryOp::Ne : BinaryOp::Eq, var_ref(*e.operands[0]), FExpr::const_i64(-1));
        case Expr::Kind::Unary: return FExpr::unary(e.unary_op, value(*e.operands[0]));
        case Expr::Kind::Call: {
            auto arg = value(*e.operands[0]);
            if (e.fn != lang::MathFn::Abs) arg = FExpr::to_f64(std::move(arg));
            return FExpr::call(e.fn, std::move(arg));
        }
        case Expr::Kind::Binary: {
            auto lhs = value(*e.operands[0]);
            auto rhs = value(*e.operands[1]);
            if (lhs->type != rhs->type || e.binary_op == BinaryOp::Div) {
                lhs = FExpr::to_f64(std::move(lhs));
                rhs = FExpr::to_f64(std::move(rhs));
            }
            return FExpr::binary(e.binary_op, std::move(lhs), std::move(rhs));
        }
        case Expr::Kind::None: break;
        }
        throw std::logic_error("expression has no scalar value");
    }

    std::vector<FStmtPtr> block(const std::vector<StmtPtr> &stmts) {
        std::vector<FStmtPtr> out;
        out.reserve(stmts.size());
        for (const auto &s : stmts) out.push_back(stmt(*s));
        return out;
    }

    FStmtPtr stmt(const Stmt &s) {
        switch (s.kind) {
        case Stmt::Kind::ForEach: {
            int v = q_.stmt_vars.at(&s);
            int counter = counter_slot(depth_);
            var_slot_[static_cast<std::size_t>(v)] = counter;
            const auto &iter = q_.type_of(*s.first);
            const auto &list_node = iter.kind == Kind::Dataset ? q_.schema.root() : *iter.node;
            const auto &item = list_node.item();
            if (item.is_primitive()) prim_elems_[v] = {columnar::item_path(iter.path, item), item.primitive_kind()};
            FExprPtr begin, end;
            if (iter.kind == Kind::Dataset) {
                begin = FExpr::const_i64(0);
                end = FExpr::num_entries();
            } else {
                auto r = ref(*s.first);
                begin = list_begin(iter, r);
                end = list_end(iter, r);
            }
            ++depth_;
            auto body = block(s.body);
            --depth_;
            return FStmt::loop(counter, std::move(begin), std::move(end), std::move(body));
        }
        case Stmt::Kind::ForRange: {
            int slot = var_slot_[static_cast<std::size_t>(q_.stmt_vars.at(&s))];
            auto begin = s.first ? value(*s.first) : FExpr::const_i64(0);
            auto end = value(*s.second);
            ++depth_;
            auto body = block(s.body);
            --depth_;
            return FStmt::loop(slot, std::move(begin), std::move(end), std::move(body));
        }
        case Stmt::Kind::If: return FStmt::if_(value(*s.first), block(s.body), block(s.orelse));
        case Stmt::Kind::Assign: {
            int v = q_.stmt_vars.at(&s);
            int slot = var_slot_[static_cast<std::size_t>(v)];
            if (q_.vars[static_cast<std::size_t>(v)].type.is_object()) return FStmt::assign(slot, ref(*s.first));
            return FStmt::assign(slot, coerce(value(*s.first), prog_.slots[static_cast<std::size_t>(slot)].type));
        }
        case Stmt::Kind::Fill: return FStmt::fill(q_.fill_hists.at(&s), FExpr::to_f64(value(*s.first)));
        }
        throw std::logic_error("unknown statement");
    }

    const TypedQuery &q_;
    FlatProgram prog_;
    std::set<std::string> user_names_;
    std::map<std::string, int> slot_by_name_;
    std::map<std::pair<std::string, ArrayRole>, int> array_ids_;
    std::vector<int> var_slot_;
    std::map<int, std::pair<std::string, PrimitiveKind>> prim_elems_;
    int depth_ = 0;
};

}  // namespace

FlatProgram transform(const TypedQuery &query) { return Lowering(query).run(); }

}  // namespace flatq::compile
