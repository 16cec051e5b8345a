#include "flatq/lang/parser.hpp"

#include <json.hpp>

namespace flatq::lang {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string &what) {
    throw QueryError(Diagnostic{DiagnosticKind::Syntax, {}, "invalid AST JSON: " + what});
}

json span_json(const SourceSpan &s) { return json::array({s.line, s.col_begin, s.col_end}); }

SourceSpan span_from(const json &j) {
    if (!j.contains("span")) return {};
    const auto &s = j["span"];
    if (!s.is_array() || s.size() != 3) bad("span must be [line, col_begin, col_end]");
    return {s[0].get<int>(), s[1].get<int>(), s[2].get<int>()};
}

json expr_json(const Expr &e, bool spans) {
    json j;
    switch (e.kind) {
    case Expr::Kind::Name: j = {{"expr", "name"}, {"id", e.text}}; break;
    case Expr::Kind::Attr: j = {{"expr", "attr"}, {"value", expr_json(*e.operands[0], spans)}, {"field", e.text}}; break;
    case Expr::Kind::Index:
        j = {{"expr", "index"}, {"value", expr_json(*e.operands[0], spans)}, {"index", expr_json(*e.operands[1], spans)}};
        break;
    case Expr::Kind::Len: j = {{"expr", "len"}, {"value", expr_json(*e.operands[0], spans)}}; break;
    case Expr::Kind::Binary:
        j = {{"expr", "binop"},
             {"op", std::string(to_string(e.binary_op))},
             {"left", expr_json(*e.operands[0], spans)},
             {"right", expr_json(*e.operands[1], spans)}};
        break;
    case Expr::Kind::Unary:
        j = {{"expr", "unary"}, {"op", std::string(to_string(e.unary_op))}, {"operand", expr_json(*e.operands[0], spans)}};
        break;
    case Expr::Kind::Call: {
        json args = json::array();
        for (const auto &a : e.operands) args.push_back(expr_json(*a, spans));
        j = {{"expr", "call"}, {"fn", std::string(to_string(e.fn))}, {"args", std::move(args)}};
        break;
    }
    case Expr::Kind::Number:
        j = {{"expr", "number"}, {"int", e.is_int}};
        if (e.is_int) j["value"] = e.int_value;
        else j["value"] = e.float_value;
        break;
    case Expr::Kind::None: j = {{"expr", "none"}}; break;
    case Expr::Kind::IsNone:
        j = {{"expr", "is_none"}, {"value", expr_json(*e.operands[0], spans)}, {"negated", e.negated}};
        break;
    }
    if (spans) j["span"] = span_json(e.span);
    return j;
}

json block_json(const std::vector<StmtPtr> &stmts, bool spans);

json stmt_json(const Stmt &s, bool spans) {
    json j;
    switch (s.kind) {
    case Stmt::Kind::ForEach:
        j = {{"stmt", "for_each"}, {"var", s.target}, {"iter", expr_json(*s.first, spans)}, {"body", block_json(s.body, spans)}};
        break;
    case Stmt::Kind::ForRange:
        j = {{"stmt", "for_range"},
             {"var", s.target},
             {"start", s.first ? expr_json(*s.first, spans) : json(nullptr)},
             {"end", expr_json(*s.second, spans)},
             {"body", block_json(s.body, spans)}};
        break;
    case Stmt::Kind::If:
        j = {{"stmt", "if"},
             {"cond", expr_json(*s.first, spans)},
             {"body", block_json(s.body, spans)},
             {"else", block_json(s.orelse, spans)}};
        break;
    case Stmt::Kind::Assign: j = {{"stmt", "assign"}, {"target", s.target}, {"value", expr_json(*s.first, spans)}}; break;
    case Stmt::Kind::Fill:
        j = {{"stmt", "fill"},
             {"hist", s.target.empty() ? json(nullptr) : json(s.target)},
             {"value", expr_json(*s.first, spans)}};
        break;
    }
    if (spans) j["span"] = span_json(s.span);
    return j;
}

json block_json(const std::vector<StmtPtr> &stmts, bool spans) {
    json arr = json::array();
    for (const auto &s : stmts) arr.push_back(stmt_json(*s, spans));
    return arr;
}

const json &field(const json &j, const char *key) {
    if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string str(const json &j, const char *key) {
    const auto &v = field(j, key);
    if (!v.is_string()) bad(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

ExprPtr expr_from(const json &j) {
    auto kind = str(j, "expr");
    SourceSpan span = span_from(j);
    if (kind == "name") return Expr::name(str(j, "id"), span);
    if (kind == "attr") return Expr::attr(expr_from(field(j, "value")), str(j, "field"), span);
    if (kind == "index") return Expr::index(expr_from(field(j, "value")), expr_from(field(j, "index")), span);
    if (kind == "len") return Expr::len(expr_from(field(j, "value")), span);
    if (kind == "binop") {
        auto op = str(j, "op");
        for (auto b : {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Lt, BinaryOp::Gt,
                       BinaryOp::Le, BinaryOp::Ge, BinaryOp::Eq, BinaryOp::Ne, BinaryOp::And, BinaryOp::Or})
            if (to_string(b) == op) return Expr::binary(b, expr_from(field(j, "left")), expr_from(field(j, "right")), span);
        bad("unknown binary operator '" + op + "'");
    }
    if (kind == "unary") {
        auto op = str(j, "op");
        if (op != "-" && op != "not") bad("unknown unary operator '" + op + "'");
        return Expr::unary(op == "-" ? UnaryOp::Neg : UnaryOp::Not, expr_from(field(j, "operand")), span);
    }
    if (kind == "call") {
        auto fn = math_fn_from_name(str(j, "fn"));
        if (!fn) bad("unknown function '" + str(j, "fn") + "'");
        const auto &args = field(j, "args");
        if (!args.is_array() || args.size() != 1) bad("math calls take exactly one argument");
        return Expr::call(*fn, {expr_from(args[0])}, span);
    }
    if (kind == "number") {
        const auto &v = field(j, "value");
        bool is_int = field(j, "int").get<bool>();
        if (is_int) {
            if (!v.is_number_integer()) bad("integer literal expected");
            return Expr::integer(v.get<std::int64_t>(), span);
        }
        if (!v.is_number()) bad("number literal expected");
        return Expr::floating(v.get<double>(), span);
    }
    if (kind == "none") return Expr::none(span);
    if (kind == "is_none") return Expr::is_none(expr_from(field(j, "value")), field(j, "negated").get<bool>(), span);
    bad("unknown expression kind '" + kind + "'");
}

std::vector<StmtPtr> block_from(const json &j) {
    if (!j.is_array()) bad("statement block must be an array");
    std::vector<StmtPtr> out;
    for (const auto &s : j) {
        auto body = [&] {
            auto b = block_from(field(s, "body"));
            if (b.empty()) bad("loop and if bodies must not be empty");
            return b;
        };
        auto kind = str(s, "stmt");
        SourceSpan span = span_from(s);
        if (kind == "for_each") {
            out.push_back(Stmt::for_each(str(s, "var"), expr_from(field(s, "iter")), body(), span));
        } else if (kind == "for_range") {
            const auto &start = field(s, "start");
            out.push_back(Stmt::for_range(str(s, "var"), start.is_null() ? nullptr : expr_from(start),
                                          expr_from(field(s, "end")), body(), span));
        } else if (kind == "if") {
            out.push_back(Stmt::if_(expr_from(field(s, "cond")), body(),
                                    s.contains("else") ? block_from(s["else"]) : std::vector<StmtPtr>{}, span));
        } else if (kind == "assign") {
            out.push_back(Stmt::assign(str(s, "target"), expr_from(field(s, "value")), span));
        } else if (kind == "fill") {
            const auto &hist = field(s, "hist");
            out.push_back(Stmt::fill(hist.is_null() ? "" : hist.get<std::string>(), expr_from(field(s, "value")), span));
        } else {
            bad("unknown statement kind '" + kind + "'");
        }
    }
    return out;
}

}  // namespace

std::string ast_to_json(const QueryAst &ast, bool with_spans) {
    json j = {{"version", 1}, {"statements", block_json(ast.statements, with_spans)}};
    return j.dump(2);
}

QueryAst ast_from_json(std::string_view text) {
    try {
        json j = json::parse(text);
        QueryAst ast;
        ast.statements = block_from(field(j, "statements"));
        return ast;
    } catch (const json::exception &e) {
        bad(e.what());
    }
}

}  // namespace flatq::lang
