#include "flatq/compile/types.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>

namespace flatq::compile {

using columnar::Schema;
using columnar::SchemaNode;
using lang::BinaryOp;
using lang::Expr;
using lang::ExprPtr;
using lang::Stmt;
using lang::StmtPtr;
using lang::UnaryOp;

InferredType InferredType::dataset(const Schema &schema) { return {Kind::Dataset, {}, &schema.root()}; }
InferredType InferredType::list(std::string path, const SchemaNode &node) { return {Kind::List, std::move(path), &node}; }
InferredType InferredType::record(std::string path, const SchemaNode &node) {
    return {Kind::RecordRef, std::move(path), &node};
}
InferredType InferredType::optional(std::string path, const SchemaNode &node) {
    return {Kind::OptionalRecordRef, std::move(path), &node};
}

std::string InferredType::to_string() const {
    auto tag = [this](const char *what) {
        return path.empty() ? std::string(what) : std::string(what) + "<" + path + ">";
    };
    switch (kind) {
    case Kind::Dataset: return "dataset";
    case Kind::List: return tag("list");
    case Kind::RecordRef: return tag("record");
    case Kind::OptionalRecordRef: return "optional " + tag("record");
    case Kind::F64: return "f64";
    case Kind::I64: return "i64";
    case Kind::Bool: return "bool";
    case Kind::None: return "None";
    }
    return "?";
}

namespace {

using Kind = InferredType::Kind;
using MaybeType = std::optional<InferredType>;

InferredType node_type(std::string path, const SchemaNode &node) {
    if (node.is_list()) return InferredType::list(std::move(path), node);
    if (node.is_record()) return InferredType::record(std::move(path), node);
    return node.primitive_kind() == columnar::PrimitiveKind::Float64 ? InferredType::f64() : InferredType::i64();
}

InferredType element_type(const InferredType &list) {
    const SchemaNode &item = list.node->item();
    return node_type(columnar::item_path(list.path, item), item);
}

MaybeType join(const InferredType &a, const InferredType &b) {
    if (a == b) return a;
    if (a.is_numeric() && b.is_numeric()) return InferredType::f64();
    auto ref_like = [](const InferredType &t) { return t.kind == Kind::RecordRef || t.kind == Kind::OptionalRecordRef; };
    if (a.kind == Kind::None && ref_like(b)) return InferredType::optional(b.path, *b.node);
    if (b.kind == Kind::None && ref_like(a)) return InferredType::optional(a.path, *a.node);
    if (ref_like(a) && ref_like(b) && a.node == b.node) return InferredType::optional(a.path, *a.node);
    return std::nullopt;
}

ExprPtr clone(const ExprPtr &e) {
    if (!e) return nullptr;
    auto c = std::make_shared<Expr>(*e);
    for (auto &op : c->operands) op = clone(op);
    return c;
}

std::vector<StmtPtr> clone(const std::vector<StmtPtr> &block);

StmtPtr clone(const StmtPtr &s) {
    auto c = std::make_shared<Stmt>(*s);
    c->first = clone(s->first);
    c->second = clone(s->second);
    c->body = clone(s->body);
    c->orelse = clone(s->orelse);
    return c;
}

std::vector<StmtPtr> clone(const std::vector<StmtPtr> &block) {
    std::vector<StmtPtr> out;
    out.reserve(block.size());
    for (const auto &s : block) out.push_back(clone(s));
    return out;
}

[[noreturn]] void fail(lang::SourceSpan span, std::string message) {
    throw lang::QueryError(lang::Diagnostic{lang::DiagnosticKind::Type, span, std::move(message)});
}

std::string quoted(const std::string &s) { return "'" + s + "'"; }

struct Flow {
    std::set<int> defined;   // object variables assigned in the current event
    std::set<int> narrowed;  // optional variables known to be non-None
};

struct Narrowing {
    std::set<int> when_true;
    std::set<int> when_false;
};

template <class T>
std::set<T> intersect(const std::set<T> &a, const std::set<T> &b) {
    std::set<T> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
    return out;
}

class Checker {
public:
    explicit Checker(TypedQuery &tq) : tq_(tq) {}

    void run() {
        declare_histograms();
        bind(tq_.ast.statements);
        types_.assign(tq_.vars.size(), std::nullopt);
        for (const auto &v : tq_.vars)
            if (v.role != VarInfo::Role::Assigned) types_[&v - tq_.vars.data()] = v.type;

        // Variable types only grow, so this terminates.
        for (;;) {
            changed_ = false;
            walk_program(false);
            if (!changed_) break;
        }
        walk_program(true);

        for (std::size_t v = 0; v < tq_.vars.size(); ++v) {
            if (!types_[v]) continue;
            if (tq_.vars[v].role == VarInfo::Role::Assigned && types_[v]->kind == Kind::None)
                fail(first_assign_.at(static_cast<int>(v)),
                     "variable " + quoted(tq_.vars[v].name) + " is only ever assigned None");
            tq_.vars[v].type = *types_[v];
        }
        for (std::size_t h = 0; h < tq_.histograms.size(); ++h) {
            bool used = std::any_of(tq_.fill_hists.begin(), tq_.fill_hists.end(),
                                    [h](const auto &kv) { return kv.second == static_cast<int>(h); });
            if (!used) fail({}, "histogram " + quoted(tq_.histograms[h]) + " is declared but never filled");
        }
    }

private:
    // ---- binding: variable ids, scoping, histogram names ----

    void declare_histograms() {
        std::set<std::string> seen;
        for (const auto &h : tq_.histograms) {
            if (h.empty()) fail({}, "histogram names must not be empty");
            if (!seen.insert(h).second) fail({}, "histogram " + quoted(h) + " is declared twice");
        }
    }

    int new_var(std::string name, VarInfo::Role role, InferredType type = InferredType::none()) {
        tq_.vars.push_back(VarInfo{std::move(name), std::move(type), role});
        return static_cast<int>(tq_.vars.size()) - 1;
    }

    void collect_names(const std::vector<StmtPtr> &block) {
        for (const auto &s : block) {
            if (s->kind == Stmt::Kind::Assign) {
                if (s->target == lang::kDatasetName) fail(s->span, "cannot assign to 'dataset'");
                if (!assigned_.count(s->target)) assigned_[s->target] = new_var(s->target, VarInfo::Role::Assigned);
            }
            collect_names(s->body);
            collect_names(s->orelse);
        }
    }

    void bind(const std::vector<StmtPtr> &block) {
        if (&block == &tq_.ast.statements) collect_names(block);
        for (const auto &s : block) {
            switch (s->kind) {
            case Stmt::Kind::ForEach:
            case Stmt::Kind::ForRange: {
                if (s->target == lang::kDatasetName) fail(s->span, "'dataset' cannot be a loop variable");
                if (assigned_.count(s->target))
                    fail(s->span, "loop variable " + quoted(s->target) + " is also assigned elsewhere");
                for (const auto &[name, id] : scope_)
                    if (name == s->target) fail(s->span, "loop variable " + quoted(s->target) + " shadows an outer loop variable");
                auto role = s->kind == Stmt::Kind::ForEach ? VarInfo::Role::ForEach : VarInfo::Role::ForRange;
                int id = new_var(s->target, role,
                                 role == VarInfo::Role::ForRange ? InferredType::i64() : InferredType::none());
                tq_.stmt_vars[s.get()] = id;
                scope_.emplace_back(s->target, id);
                bind(s->body);
                scope_.pop_back();
                break;
            }
            case Stmt::Kind::If:
                bind(s->body);
                bind(s->orelse);
                break;
            case Stmt::Kind::Assign: tq_.stmt_vars[s.get()] = assigned_.at(s->target); break;
            case Stmt::Kind::Fill: {
                const auto &hs = tq_.histograms;
                if (s->target.empty()) {
                    if (hs.size() != 1)
                        fail(s->span, "fill_histogram without a histogram name needs exactly one declared histogram (have " +
                                          std::to_string(hs.size()) + ")");
                    tq_.fill_hists[s.get()] = 0;
                } else {
                    auto it = std::find(hs.begin(), hs.end(), s->target);
                    if (it == hs.end()) {
                        std::string known;
                        for (const auto &h : hs) known += (known.empty() ? "" : ", ") + h;
                        fail(s->span, "unknown histogram " + quoted(s->target) + "; declared: " +
                                          (known.empty() ? "none" : known));
                    }
                    tq_.fill_hists[s.get()] = static_cast<int>(it - hs.begin());
                }
                break;
            }
            }
        }
    }

    // ---- typing walk ----

    void walk_program(bool check) {
        check_ = check;
        seen_.clear();
        scope_.clear();
        dataset_depth_ = 0;
        Flow flow;
        walk_block(tq_.ast.statements, flow);
    }

    std::nullopt_t error(lang::SourceSpan span, std::string message) {
        if (check_) fail(span, std::move(message));
        return std::nullopt;
    }

    void record(const Expr &e, const InferredType &t) {
        if (check_) tq_.expr_types[&e] = t;
    }

    std::optional<int> lookup(const std::string &name) const {
        for (auto it = scope_.rbegin(); it != scope_.rend(); ++it)
            if (it->first == name) return it->second;
        auto a = assigned_.find(name);
        if (a != assigned_.end()) return a->second;
        return std::nullopt;
    }

    void assigned_in(const std::vector<StmtPtr> &block, std::set<int> &out) const {
        for (const auto &s : block) {
            if (s->kind == Stmt::Kind::Assign) out.insert(assigned_.at(s->target));
            assigned_in(s->body, out);
            assigned_in(s->orelse, out);
        }
    }

    void walk_block(const std::vector<StmtPtr> &block, Flow &flow) {
        for (const auto &s : block) walk_stmt(*s, flow);
    }

    void walk_loop_body(const Stmt &s, int var, Flow &flow, bool over_dataset) {
        std::set<int> reassigned;
        assigned_in(s.body, reassigned);
        Flow inner;
        if (!over_dataset) {
            inner = flow;
            for (int v : reassigned) inner.narrowed.erase(v);
        }
        scope_.emplace_back(s.target, var);
        if (over_dataset) ++dataset_depth_;
        walk_block(s.body, inner);
        if (over_dataset) --dataset_depth_;
        scope_.pop_back();
        for (int v : reassigned) flow.narrowed.erase(v);
    }

    void walk_stmt(const Stmt &s, Flow &flow) {
        switch (s.kind) {
        case Stmt::Kind::ForEach: {
            int var = tq_.stmt_vars.at(&s);
            auto iter = type_expr(*s.first, flow);
            bool over_dataset = false;
            if (iter) {
                if (iter->kind == Kind::Dataset) {
                    if (dataset_depth_ > 0) error(s.first->span, "nested iteration over the dataset is not supported");
                    over_dataset = true;
                    types_[var] = element_type(InferredType::list({}, tq_.schema.root()));
                } else if (iter->kind == Kind::List) {
                    types_[var] = element_type(*iter);
                } else {
                    error(s.first->span, "cannot iterate over " + iter->to_string());
                }
            }
            if (types_[var]) tq_.vars[var].type = *types_[var];
            walk_loop_body(s, var, flow, over_dataset);
            break;
        }
        case Stmt::Kind::ForRange: {
            int var = tq_.stmt_vars.at(&s);
            for (const auto &bound : {s.first, s.second}) {
                if (!bound) continue;
                auto t = type_expr(*bound, flow);
                if (t && t->kind != Kind::I64) error(bound->span, "range bounds must be integers, got " + t->to_string());
            }
            walk_loop_body(s, var, flow, false);
            break;
        }
        case Stmt::Kind::If: {
            auto c = type_expr(*s.first, flow);
            if (c && c->kind != Kind::Bool) error(s.first->span, "condition must be bool, got " + c->to_string());
            Narrowing n = narrowing(*s.first);
            Flow then_flow = flow, else_flow = flow;
            then_flow.narrowed.insert(n.when_true.begin(), n.when_true.end());
            else_flow.narrowed.insert(n.when_false.begin(), n.when_false.end());
            walk_block(s.body, then_flow);
            walk_block(s.orelse, else_flow);
            flow.defined = intersect(then_flow.defined, else_flow.defined);
            flow.narrowed = intersect(then_flow.narrowed, else_flow.narrowed);
            break;
        }
        case Stmt::Kind::Assign: {
            int var = tq_.stmt_vars.at(&s);
            auto t = type_expr(*s.first, flow);
            seen_.insert(var);
            first_assign_.emplace(var, s.span);
            if (!t) break;
            if (t->kind == Kind::Dataset) fail(s.first->span, "the dataset cannot be assigned to a variable");
            auto &cur = types_[var];
            if (!cur) {
                cur = *t;
                changed_ = true;
            } else {
                auto j = join(*cur, *t);
                if (!j)
                    fail(s.first->span, "cannot assign " + t->to_string() + " to " + quoted(s.target) + ", which holds " +
                                            cur->to_string());
                if (!(*j == *cur)) {
                    cur = *j;
                    changed_ = true;
                }
            }
            bool object = cur->is_object() || cur->kind == Kind::None;
            if (object) {
                if (check_ && dataset_depth_ == 0)
                    fail(s.span, "object variable " + quoted(s.target) + " must be assigned inside the event loop");
                flow.defined.insert(var);
                if (t->kind == Kind::RecordRef) flow.narrowed.insert(var);
                else flow.narrowed.erase(var);
            }
            break;
        }
        case Stmt::Kind::Fill: {
            auto t = type_expr(*s.first, flow);
            if (t && !t->is_numeric()) error(s.first->span, "fill_histogram expects a number, got " + t->to_string());
            break;
        }
        }
    }

    Narrowing narrowing(const Expr &e) const {
        Narrowing n;
        switch (e.kind) {
        case Expr::Kind::IsNone: {
            const Expr &v = *e.operands[0];
            if (v.kind != Expr::Kind::Name) break;
            auto id = lookup(v.text);
            if (!id || !types_[*id] || types_[*id]->kind != Kind::OptionalRecordRef) break;
            (e.negated ? n.when_true : n.when_false).insert(*id);
            break;
        }
        case Expr::Kind::Unary:
            if (e.unary_op == UnaryOp::Not) {
                auto inner = narrowing(*e.operands[0]);
                n.when_true = std::move(inner.when_false);
                n.when_false = std::move(inner.when_true);
            }
            break;
        case Expr::Kind::Binary:
            if (e.binary_op == BinaryOp::And) {
                auto a = narrowing(*e.operands[0]), b = narrowing(*e.operands[1]);
                n.when_true = std::move(a.when_true);
                n.when_true.insert(b.when_true.begin(), b.when_true.end());
            } else if (e.binary_op == BinaryOp::Or) {
                auto a = narrowing(*e.operands[0]), b = narrowing(*e.operands[1]);
                n.when_false = std::move(a.when_false);
                n.when_false.insert(b.when_false.begin(), b.when_false.end());
            }
            break;
        default: break;
        }
        return n;
    }

    MaybeType type_name(const Expr &e, const Flow &flow) {
        if (e.text == lang::kDatasetName) return InferredType::dataset(tq_.schema);
        auto id = lookup(e.text);
        if (!id) return error(e.span, "unknown name " + quoted(e.text));
        if (check_) tq_.name_vars[&e] = *id;
        const VarInfo &info = tq_.vars[*id];
        if (info.role == VarInfo::Role::Assigned && !seen_.count(*id))
            return error(e.span, "variable " + quoted(e.text) + " is used before assignment");
        const auto &t = types_[*id];
        if (!t) return std::nullopt;
        if (info.role == VarInfo::Role::Assigned && (t->is_object() || t->kind == Kind::None)) {
            if (dataset_depth_ == 0)
                return error(e.span, "object variable " + quoted(e.text) + " cannot be used outside the event loop");
            if (!flow.defined.count(*id))
                return error(e.span, "object variable " + quoted(e.text) +
                                         " may not be assigned yet in this iteration of the event loop");
            if (t->kind == Kind::OptionalRecordRef && flow.narrowed.count(*id))
                return InferredType::record(t->path, *t->node);
        }
        return *t;
    }

    MaybeType type_expr(const Expr &e, const Flow &flow) {
        MaybeType t = compute(e, flow);
        if (t) record(e, *t);
        return t;
    }

    MaybeType compute(const Expr &e, const Flow &flow) {
        switch (e.kind) {
        case Expr::Kind::Name: return type_name(e, flow);
        case Expr::Kind::Number: return e.is_int ? InferredType::i64() : InferredType::f64();
        case Expr::Kind::None: return InferredType::none();
        case Expr::Kind::Attr: {
            auto base = type_expr(*e.operands[0], flow);
            if (!base) return std::nullopt;
            if (base->kind == Kind::OptionalRecordRef)
                return error(e.span, "value may be None here; test it with 'is not None' before reading ." + e.text);
            if (base->kind != Kind::RecordRef) return error(e.span, base->to_string() + " has no attribute " + quoted(e.text));
            int f = base->node->field_index(e.text);
            if (f < 0) {
                std::string known;
                for (const auto &fld : base->node->fields()) known += (known.empty() ? "" : ", ") + fld.name;
                return error(e.span, "no field " + quoted(e.text) + " in " + base->to_string() + " (fields: " + known + ")");
            }
            if (check_) tq_.attr_fields[&e] = f;
            const auto &field = base->node->fields()[static_cast<std::size_t>(f)];
            return node_type(columnar::join_path(base->path, field.name), *field.type);
        }
        case Expr::Kind::Index: {
            auto base = type_expr(*e.operands[0], flow);
            auto idx = type_expr(*e.operands[1], flow);
            if (!base || !idx) return std::nullopt;
            if (base->kind == Kind::Dataset) return error(e.span, "the dataset cannot be indexed; iterate over it instead");
            if (base->kind != Kind::List) return error(e.span, "cannot index " + base->to_string());
            if (idx->kind != Kind::I64) return error(e.operands[1]->span, "list index must be an integer, got " + idx->to_string());
            return element_type(*base);
        }
        case Expr::Kind::Len: {
            auto base = type_expr(*e.operands[0], flow);
            if (!base) return std::nullopt;
            if (base->kind != Kind::List && base->kind != Kind::Dataset)
                return error(e.span, "len() expects a list, got " + base->to_string());
            return InferredType::i64();
        }
        case Expr::Kind::Unary: {
            auto v = type_expr(*e.operands[0], flow);
            if (!v) return std::nullopt;
            if (e.unary_op == UnaryOp::Not) {
                if (v->kind != Kind::Bool) return error(e.span, "'not' expects bool, got " + v->to_string());
                return v;
            }
            if (!v->is_numeric()) return error(e.span, "cannot negate " + v->to_string());
            return v;
        }
        case Expr::Kind::Call: {
            auto v = type_expr(*e.operands[0], flow);
            if (!v) return std::nullopt;
            if (!v->is_numeric())
                return error(e.span, std::string(lang::to_string(e.fn)) + "() expects a number, got " + v->to_string());
            if (e.fn == lang::MathFn::Abs && v->kind == Kind::I64) return InferredType::i64();
            return InferredType::f64();
        }
        case Expr::Kind::IsNone: {
            const Expr &v = *e.operands[0];
            auto t = type_expr(v, flow);
            if (!t) return std::nullopt;
            auto id = v.kind == Expr::Kind::Name ? lookup(v.text) : std::nullopt;
            if (!id || !types_[*id] || types_[*id]->kind != Kind::OptionalRecordRef)
                return error(e.span, "'is None' applies only to variables that may hold None, got " + t->to_string());
            return InferredType::boolean();
        }
        case Expr::Kind::Binary: {
            BinaryOp op = e.binary_op;
            auto lhs = type_expr(*e.operands[0], flow);
            MaybeType rhs;
            if (op == BinaryOp::And || op == BinaryOp::Or) {
                Flow f = flow;
                auto n = narrowing(*e.operands[0]);
                const auto &extra = op == BinaryOp::And ? n.when_true : n.when_false;
                f.narrowed.insert(extra.begin(), extra.end());
                rhs = type_expr(*e.operands[1], f);
            } else {
                rhs = type_expr(*e.operands[1], flow);
            }
            if (!lhs || !rhs) return std::nullopt;
            std::string sym(lang::to_string(op));
            if (op == BinaryOp::And || op == BinaryOp::Or) {
                if (lhs->kind != Kind::Bool || rhs->kind != Kind::Bool)
                    return error(e.span, "'" + sym + "' expects bool operands, got " + lhs->to_string() + " and " +
                                             rhs->to_string());
                return InferredType::boolean();
            }
            if (lang::is_comparison(op)) {
                if (lhs->is_numeric() && rhs->is_numeric()) return InferredType::boolean();
                if ((op == BinaryOp::Eq || op == BinaryOp::Ne) && lhs->kind == Kind::Bool && rhs->kind == Kind::Bool)
                    return InferredType::boolean();
                if (lhs->kind == Kind::None || rhs->kind == Kind::None)
                    return error(e.span, "compare with None using 'is None' or 'is not None'");
                return error(e.span, "cannot compare " + lhs->to_string() + " " + sym + " " + rhs->to_string());
            }
            if (!lhs->is_numeric() || !rhs->is_numeric())
                return error(e.span, "operator '" + sym + "' expects numbers, got " + lhs->to_string() + " and " +
                                         rhs->to_string());
            if (op != BinaryOp::Div && lhs->kind == Kind::I64 && rhs->kind == Kind::I64) return InferredType::i64();
            return InferredType::f64();
        }
        }
        return std::nullopt;
    }

    TypedQuery &tq_;
    bool check_ = false;
    bool changed_ = false;
    int dataset_depth_ = 0;
    std::vector<MaybeType> types_;
    std::map<std::string, int> assigned_;
    std::vector<std::pair<std::string, int>> scope_;
    std::set<int> seen_;
    std::map<int, lang::SourceSpan> first_assign_;
};

}  // namespace

TypedQuery infer_types(const lang::QueryAst &ast, const columnar::Schema &schema,
                       const std::vector<std::string> &histograms) {
    TypedQuery tq{lang::QueryAst{clone(ast.statements)}, schema, histograms, {}, {}, {}, {}, {}, {}};
    Checker(tq).run();
    return tq;
}

}  // namespace flatq::compile
