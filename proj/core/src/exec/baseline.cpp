#include "flatq/exec/engine.hpp"

#include "exec/arith.hpp"
#include "exec/common.hpp"

namespace flatq::exec {

using columnar::LogicalValue;
using compile::InferredType;
using lang::BinaryOp;
using lang::Expr;
using lang::Stmt;
using lang::StmtPtr;
using Kind = InferredType::Kind;

namespace {

// Static types decide which member is live; obj == nullptr is None.
struct Value {
    std::int64_t i = 0;
    double f = 0.0;
    bool b = false;
    const LogicalValue *obj = nullptr;
};

Value from_logical(const LogicalValue &v, const InferredType &t) {
    Value out;
    switch (t.kind) {
    case Kind::F64: out.f = std::get<double>(v.v); break;
    case Kind::I64:
        if (auto c = std::get_if<char>(&v.v)) out.i = static_cast<unsigned char>(*c);
        else out.i = std::get<std::int64_t>(v.v);
        break;
    default: out.obj = &v; break;
    }
    return out;
}

class Interpreter {
public:
    Interpreter(const compile::TypedQuery &q, const columnar::ColumnarDataset &ds, std::vector<Histogram *> hists,
                FillTrace *trace)
        : q_(q), ds_(ds), materialize_(ds), hists_(std::move(hists)), trace_(trace), env_(q.vars.size()) {}

    void run() { block(q_.ast.statements); }

private:
    void block(const std::vector<StmtPtr> &stmts) {
        for (const auto &s : stmts) stmt(*s);
    }

    void stmt(const Stmt &s) {
        switch (s.kind) {
        case Stmt::Kind::ForEach: {
            int var = q_.stmt_vars.at(&s);
            const InferredType &elem = q_.vars[static_cast<std::size_t>(var)].type;
            if (q_.type_of(*s.first).kind == Kind::Dataset) {
                for (std::int64_t e = 0, n = ds_.num_entries(); e < n; ++e) {
                    LogicalValue entry = materialize_(e);
                    env_[static_cast<std::size_t>(var)] = from_logical(entry, elem);
                    block(s.body);
                }
            } else {
                const auto &items = eval(*s.first).obj->list().items;
                for (const auto &item : items) {
                    env_[static_cast<std::size_t>(var)] = from_logical(item, elem);
                    block(s.body);
                }
            }
            break;
        }
        case Stmt::Kind::ForRange: {
            auto &slot = env_[static_cast<std::size_t>(q_.stmt_vars.at(&s))];
            std::int64_t begin = s.first ? eval(*s.first).i : 0;
            std::int64_t end = eval(*s.second).i;
            for (std::int64_t k = begin; k < end; ++k) {
                slot.i = k;
                block(s.body);
            }
            break;
        }
        case Stmt::Kind::If:
            if (eval(*s.first).b) block(s.body);
            else block(s.orelse);
            break;
        case Stmt::Kind::Assign: {
            int var = q_.stmt_vars.at(&s);
            Value v = eval(*s.first);
            if (q_.vars[static_cast<std::size_t>(var)].type.kind == Kind::F64 && q_.type_of(*s.first).kind == Kind::I64)
                v.f = arith::to_f64(v.i);
            env_[static_cast<std::size_t>(var)] = v;
            break;
        }
        case Stmt::Kind::Fill: {
            Value v = eval(*s.first);
            double x = q_.type_of(*s.first).kind == Kind::I64 ? arith::to_f64(v.i) : v.f;
            int h = q_.fill_hists.at(&s);
            hists_[static_cast<std::size_t>(h)]->fill(x);
            if (trace_) trace_->push_back({h, x});
            break;
        }
        }
    }

    double as_f64(const Expr &e, const Value &v) const {
        return q_.type_of(e).kind == Kind::I64 ? arith::to_f64(v.i) : v.f;
    }

    Value eval(const Expr &e) {
        Value out;
        switch (e.kind) {
        case Expr::Kind::Name: {
            auto it = q_.name_vars.find(&e);
            if (it == q_.name_vars.end()) return out;  // the dataset itself
            return env_[static_cast<std::size_t>(it->second)];
        }
        case Expr::Kind::Number:
            if (e.is_int) out.i = e.int_value;
            else out.f = e.float_value;
            return out;
        case Expr::Kind::None: return out;
        case Expr::Kind::Attr: {
            Value base = eval(*e.operands[0]);
            const auto &field = base.obj->record().fields[static_cast<std::size_t>(q_.attr_fields.at(&e))];
            return from_logical(field, q_.type_of(e));
        }
        case Expr::Kind::Index: {
            Value list = eval(*e.operands[0]);
            std::int64_t idx = eval(*e.operands[1]).i;
            const auto &items = list.obj->list().items;
            if (idx < 0 || idx >= static_cast<std::int64_t>(items.size())) throw_index_error(idx, static_cast<std::int64_t>(items.size()));
            return from_logical(items[static_cast<std::size_t>(idx)], q_.type_of(e));
        }
        case Expr::Kind::Len:
            if (q_.type_of(*e.operands[0]).kind == Kind::Dataset) out.i = ds_.num_entries();
            else out.i = static_cast<std::int64_t>(eval(*e.operands[0]).obj->list().items.size());
            return out;
        case Expr::Kind::IsNone: {
            bool none = eval(*e.operands[0]).obj == nullptr;
            out.b = e.negated ? !none : none;
            return out;
        }
        case Expr::Kind::Unary: {
            Value v = eval(*e.operands[0]);
            if (e.unary_op == lang::UnaryOp::Not) out.b = !v.b;
            else if (q_.type_of(e).kind == Kind::I64) out.i = arith::neg(v.i);
            else out.f = -v.f;
            return out;
        }
        case Expr::Kind::Call: {
            const Expr &arg = *e.operands[0];
            Value v = eval(arg);
            if (q_.type_of(e).kind == Kind::I64) out.i = arith::abs(v.i);
            else out.f = arith::call(e.fn, as_f64(arg, v));
            return out;
        }
        case Expr::Kind::Binary: {
            BinaryOp op = e.binary_op;
            const Expr &l = *e.operands[0];
            const Expr &r = *e.operands[1];
            if (op == BinaryOp::And) {
                out.b = eval(l).b && eval(r).b;
                return out;
            }
            if (op == BinaryOp::Or) {
                out.b = eval(l).b || eval(r).b;
                return out;
            }
            Value a = eval(l);
            Value b = eval(r);
            Kind lk = q_.type_of(l).kind, rk = q_.type_of(r).kind;
            if (lang::is_comparison(op)) {
                if (lk == Kind::Bool) out.b = arith::compare(op, a.b, b.b);
                else if (lk == Kind::I64 && rk == Kind::I64) out.b = arith::compare(op, a.i, b.i);
                else out.b = arith::compare(op, as_f64(l, a), as_f64(r, b));
                return out;
            }
            if (q_.type_of(e).kind == Kind::I64) out.i = arith::apply(op, a.i, b.i);
            else out.f = arith::apply(op, as_f64(l, a), as_f64(r, b));
            return out;
        }
        }
        return out;
    }

    const compile::TypedQuery &q_;
    const columnar::ColumnarDataset &ds_;
    columnar::EntryMaterializer materialize_;
    std::vector<Histogram *> hists_;
    FillTrace *trace_;
    std::vector<Value> env_;
};

}  // namespace

HistogramMap run_baseline(const compile::TypedQuery &query, const columnar::ColumnarDataset &dataset,
                          const std::vector<HistogramSpec> &specs, FillTrace *trace) {
    if (!(query.schema == dataset.schema())) throw ProgramMismatchError("query was typed against a different schema");
    HistogramMap out = make_histograms(specs);
    auto order = bind_histograms(out, query.histograms);
    Interpreter(query, dataset, std::move(order), trace).run();
    return out;
}

}  // namespace flatq::exec
