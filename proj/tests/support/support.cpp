#include "support.hpp"

#include <cmath>
#include <stdexcept>

namespace flatq::testing {

using columnar::ListValue;
using columnar::LogicalValue;
using columnar::RecordValue;
using columnar::SchemaNode;
using columnar::SchemaNodePtr;

namespace {

LogicalValue pair(char c, std::int64_t n) { return RecordValue{{LogicalValue(c), LogicalValue(n)}}; }

LogicalValue list(std::vector<LogicalValue> items) { return ListValue{std::move(items)}; }

}  // namespace

LogicalValue pair_fixture_value() {
    return list({
        list({list({pair('a', 1), pair('b', 2), pair('c', 3), pair('d', 4)}), list({}),
              list({pair('e', 5), pair('f', 6)})}),
        list({}),
        list({list({pair('g', 7)})}),
    });
}

columnar::ColumnarDataset pair_fixture_dataset() {
    std::map<std::string, std::vector<std::int64_t>> offsets{
        {"item", {0, 3, 3, 4}},
        {"item.item", {0, 4, 4, 6, 7}},
    };
    std::map<std::string, columnar::Column> attrs{
        {"item.item.first", std::vector<std::uint8_t>{'a', 'b', 'c', 'd', 'e', 'f', 'g'}},
        {"item.item.second", std::vector<std::int64_t>{1, 2, 3, 4, 5, 6, 7}},
    };
    return columnar::ColumnarDataset(columnar::pair_fixture_schema(), 3, std::move(offsets), std::move(attrs));
}

// ---- random schemas and values ----

namespace {

int uniform(Rng &rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

SchemaNodePtr random_node(Rng &rng, int depth) {
    int choice = depth <= 0 ? 2 : uniform(rng, 0, 2);
    if (choice == 0) return SchemaNode::list(random_node(rng, depth - 1));
    if (choice == 1) {
        std::vector<columnar::SchemaField> fields;
        int n = uniform(rng, 1, 3);
        for (int i = 0; i < n; ++i) fields.push_back({"f" + std::to_string(i), random_node(rng, depth - 1)});
        return SchemaNode::record(std::move(fields));
    }
    static const columnar::PrimitiveKind kinds[] = {columnar::PrimitiveKind::Float64, columnar::PrimitiveKind::Int64,
                                                    columnar::PrimitiveKind::Char};
    return SchemaNode::primitive(kinds[uniform(rng, 0, 2)]);
}

LogicalValue random_of(Rng &rng, const SchemaNode &node, int max_len) {
    switch (node.kind()) {
    case SchemaNode::Kind::List: {
        ListValue l;
        int n = uniform(rng, 0, max_len);
        for (int i = 0; i < n; ++i) l.items.push_back(random_of(rng, node.item(), max_len));
        return l;
    }
    case SchemaNode::Kind::Record: {
        RecordValue r;
        for (const auto &f : node.fields()) r.fields.push_back(random_of(rng, *f.type, max_len));
        return r;
    }
    case SchemaNode::Kind::Primitive:
        switch (node.primitive_kind()) {
        case columnar::PrimitiveKind::Float64: {
            // Mix ordinary values with signed zeros, infinities and NaN payloads.
            int pick = uniform(rng, 0, 9);
            if (pick == 0) return LogicalValue(-0.0);
            if (pick == 1) return LogicalValue(std::numeric_limits<double>::infinity());
            if (pick == 2) return LogicalValue(std::nan("7"));
            return LogicalValue(std::normal_distribution<double>(0.0, 100.0)(rng));
        }
        case columnar::PrimitiveKind::Int64:
            return LogicalValue(static_cast<std::int64_t>(rng()));
        case columnar::PrimitiveKind::Char:
            return LogicalValue(static_cast<char>(uniform(rng, 0, 255)));
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace

columnar::Schema random_schema(Rng &rng, int max_depth) {
    return columnar::Schema(SchemaNode::list(random_node(rng, max_depth - 1)));
}

LogicalValue random_value(Rng &rng, const columnar::Schema &schema, int max_len) {
    return random_of(rng, schema.root(), max_len);
}

// ---- random ASTs ----

namespace {

using lang::BinaryOp;
using lang::Expr;
using lang::ExprPtr;
using lang::MathFn;
using lang::Stmt;
using lang::StmtPtr;
using lang::UnaryOp;

const char *const kNames[] = {"a", "b", "x", "total", "event", "muon", "m1", "dataset", "best"};

std::string random_name(Rng &rng) { return kNames[uniform(rng, 0, 8)]; }

ExprPtr random_expr(Rng &rng, int depth) {
    int choice = depth <= 0 ? uniform(rng, 0, 2) : uniform(rng, 0, 10);
    switch (choice) {
    case 0: return Expr::name(random_name(rng));
    case 1: return Expr::integer(uniform(rng, 0, 1000));
    case 2: {
        if (uniform(rng, 0, 3) == 0) return Expr::none();
        double v = std::exp(std::uniform_real_distribution<double>(-20.0, 20.0)(rng));
        return Expr::floating(v);
    }
    case 3: return Expr::attr(random_expr(rng, depth - 1), random_name(rng));
    case 4: return Expr::index(random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    case 5: return Expr::len(random_expr(rng, depth - 1));
    case 6:
    case 7: {
        auto op = static_cast<BinaryOp>(uniform(rng, 0, 11));
        return Expr::binary(op, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
    }
    case 8: {
        auto op = uniform(rng, 0, 1) ? UnaryOp::Neg : UnaryOp::Not;
        return Expr::unary(op, random_expr(rng, depth - 1));
    }
    case 9: return Expr::call(static_cast<MathFn>(uniform(rng, 0, 6)), {random_expr(rng, depth - 1)});
    default: return Expr::is_none(random_expr(rng, depth - 1), uniform(rng, 0, 1) == 1);
    }
}

std::vector<StmtPtr> random_block(Rng &rng, int depth);

StmtPtr random_stmt(Rng &rng, int depth) {
    int choice = depth <= 0 ? uniform(rng, 3, 4) : uniform(rng, 0, 4);
    switch (choice) {
    case 0: return Stmt::for_each(random_name(rng), random_expr(rng, 2), random_block(rng, depth - 1));
    case 1: {
        ExprPtr start = uniform(rng, 0, 1) ? random_expr(rng, 2) : nullptr;
        return Stmt::for_range(random_name(rng), start, random_expr(rng, 2), random_block(rng, depth - 1));
    }
    case 2: {
        std::vector<StmtPtr> orelse;
        if (uniform(rng, 0, 1)) orelse = random_block(rng, depth - 1);
        return Stmt::if_(random_expr(rng, 3), random_block(rng, depth - 1), std::move(orelse));
    }
    case 3: return Stmt::assign(random_name(rng), random_expr(rng, 3));
    default: return Stmt::fill(uniform(rng, 0, 1) ? random_name(rng) : "", random_expr(rng, 3));
    }
}

std::vector<StmtPtr> random_block(Rng &rng, int depth) {
    std::vector<StmtPtr> out;
    int n = uniform(rng, 1, 3);
    for (int i = 0; i < n; ++i) out.push_back(random_stmt(rng, depth));
    return out;
}

}  // namespace

lang::QueryAst random_ast(Rng &rng) {
    lang::QueryAst ast;
    int n = uniform(rng, 0, 4);
    for (int i = 0; i < n; ++i) ast.statements.push_back(random_stmt(rng, 3));
    return ast;
}

// ---- random well-typed event queries ----

namespace {

class QueryWriter {
public:
    explicit QueryWriter(Rng &rng) : rng_(rng) {}

    std::string write() {
        out_ = "for event in dataset:\n";
        line(1, "s0 = 0.0");
        line(1, "s1 = 1");
        line(1, "best = None");
        line(1, "for m in event.muons:");
        line(2, "if m.pt > " + std::to_string(uniform(rng_, 0, 60)) + ".0:");
        line(3, "best = m");
        block(1, uniform(rng_, 1, 4), 3);
        line(1, "fill_histogram(s0)");
        return out_;
    }

private:
    void line(int indent, const std::string &text) { out_ += std::string(2 * static_cast<std::size_t>(indent), ' ') + text + "\n"; }

    std::string attr() {
        static const char *const names[] = {"pt", "eta", "phi"};
        return names[uniform(rng_, 0, 2)];
    }

    std::string leaf() {
        std::vector<std::string> choices = {"s0", "s1", "len(event.muons)", std::to_string(uniform(rng_, 0, 9)),
                                            std::to_string(uniform(rng_, 0, 999)) + ".25"};
        for (const auto &m : muons_) choices.push_back(m + "." + attr());
        for (const auto &i : indices_) {
            choices.push_back(i);
            choices.push_back("event.muons[" + i + "]." + attr());
        }
        return choices[static_cast<std::size_t>(uniform(rng_, 0, static_cast<int>(choices.size()) - 1))];
    }

    std::string number(int depth) {
        if (depth <= 0) return leaf();
        switch (uniform(rng_, 0, 6)) {
        case 0: return "(" + number(depth - 1) + " + " + number(depth - 1) + ")";
        case 1: return "(" + number(depth - 1) + " - " + number(depth - 1) + ")";
        case 2: return "(" + number(depth - 1) + " * " + number(depth - 1) + ")";
        case 3: return "(" + number(depth - 1) + " / " + number(depth - 1) + ")";
        case 4: {
            static const char *const fns[] = {"sqrt", "cosh", "cos", "sin", "exp", "log", "abs"};
            return std::string(fns[uniform(rng_, 0, 6)]) + "(" + number(depth - 1) + ")";
        }
        case 5: return "-" + leaf();
        default: return leaf();
        }
    }

    std::string condition(int depth) {
        static const char *const cmp[] = {"<", "<=", ">", ">=", "==", "!="};
        switch (depth <= 0 ? 0 : uniform(rng_, 0, 4)) {
        case 1: return condition(depth - 1) + " and " + condition(depth - 1);
        case 2: return condition(depth - 1) + " or " + condition(depth - 1);
        case 3: return "not (" + condition(depth - 1) + ")";
        default: return number(1) + " " + cmp[uniform(rng_, 0, 5)] + " " + number(1);
        }
    }

    void block(int indent, int count, int depth) {
        for (int i = 0; i < count; ++i) statement(indent, depth);
    }

    void statement(int indent, int depth) {
        int choice = depth <= 0 ? uniform(rng_, 0, 2) : uniform(rng_, 0, 7);
        switch (choice) {
        case 0:
        case 1: line(indent, "fill_histogram(" + number(2) + ")"); return;
        case 2: line(indent, (uniform(rng_, 0, 1) ? "s0 = " : "s0 = s0 + ") + number(2)); return;
        case 3: {
            line(indent, "if " + condition(1) + ":");
            block(indent + 1, uniform(rng_, 1, 2), depth - 1);
            if (uniform(rng_, 0, 1)) {
                line(indent, "else:");
                block(indent + 1, uniform(rng_, 1, 2), depth - 1);
            }
            return;
        }
        case 4:
        case 5: {
            std::string m = "m" + std::to_string(muons_.size());
            line(indent, "for " + m + " in event.muons:");
            muons_.push_back(m);
            if (uniform(rng_, 0, 1)) line(indent + 1, "best = " + m);
            block(indent + 1, uniform(rng_, 1, 3), depth - 1);
            muons_.pop_back();
            return;
        }
        case 6: {
            std::string i = "i" + std::to_string(indices_.size());
            std::string start = indices_.empty() || uniform(rng_, 0, 1) ? "" : indices_.back() + ", ";
            line(indent, "for " + i + " in range(" + start + "len(event.muons)):");
            indices_.push_back(i);
            block(indent + 1, uniform(rng_, 1, 3), depth - 1);
            indices_.pop_back();
            return;
        }
        default:
            line(indent, "if best is not None:");
            line(indent + 1, "fill_histogram(best." + attr() + ")");
            line(indent + 1, "s1 = s1 + 1");
            return;
        }
    }

    Rng &rng_;
    std::string out_;
    std::vector<std::string> muons_;
    std::vector<std::string> indices_;
};

}  // namespace

std::string random_event_query(Rng &rng) { return QueryWriter(rng).write(); }

// ---- corpus oracle ----

namespace {

struct Muon {
    double pt, eta, phi;
};

std::vector<Muon> muons_of(const LogicalValue &event) {
    std::vector<Muon> out;
    for (const auto &m : event.record().fields.at(0).list().items) {
        const auto &f = m.record().fields;
        out.push_back({std::get<double>(f.at(0).v), std::get<double>(f.at(1).v), std::get<double>(f.at(2).v)});
    }
    return out;
}

}  // namespace

std::vector<double> oracle_fills(const std::string &query, const LogicalValue &events) {
    std::vector<double> fills;
    for (const auto &event : events.list().items) {
        auto mu = muons_of(event);
        if (query == "max_pt") {
            double maximum = 0.0;
            for (const auto &m : mu)
                if (m.pt > maximum) maximum = m.pt;
            fills.push_back(maximum);
        } else if (query == "eta_of_best") {
            double maximum = 0.0;
            const Muon *best = nullptr;
            for (const auto &m : mu)
                if (m.pt > maximum) {
                    maximum = m.pt;
                    best = &m;
                }
            if (best) fills.push_back(best->eta);
        } else if (query == "fill_all_pt") {
            for (const auto &m : mu) fills.push_back(m.pt);
        } else if (query == "mass_of_pairs" || query == "pt_sum_of_pairs") {
            for (std::size_t i = 0; i < mu.size(); ++i)
                for (std::size_t j = i + 1; j < mu.size(); ++j) {
                    const Muon &a = mu[i];
                    const Muon &b = mu[j];
                    if (query == "mass_of_pairs")
                        fills.push_back(std::sqrt(2 * a.pt * b.pt * (std::cosh(a.eta - b.eta) - std::cos(a.phi - b.phi))));
                    else
                        fills.push_back(a.pt + b.pt);
                }
        } else {
            throw std::invalid_argument("no oracle for query '" + query + "'");
        }
    }
    return fills;
}

std::string corpus_dir() { return FLATQ_TEST_CORPUS; }

}  // namespace flatq::testing
