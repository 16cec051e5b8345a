#include "flatq/lang/parser.hpp"

#include <charconv>

namespace flatq::lang {

namespace {

// Binding strength, loosest first.
enum Prec : int { kOr = 1, kAnd, kNot, kCompare, kAdd, kMul, kUnary, kAtom };

int precedence(const Expr &e) {
    switch (e.kind) {
    case Expr::Kind::Binary:
        switch (e.binary_op) {
        case BinaryOp::Or: return kOr;
        case BinaryOp::And: return kAnd;
        case BinaryOp::Add:
        case BinaryOp::Sub: return kAdd;
        case BinaryOp::Mul:
        case BinaryOp::Div: return kMul;
        default: return kCompare;
        }
    case Expr::Kind::Unary: return e.unary_op == UnaryOp::Not ? kNot : kUnary;
    case Expr::Kind::IsNone: return kCompare;
    default: return kAtom;
    }
}

std::string format_float(double v) {
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, r.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void print(std::string &out, const Expr &e);

void print_operand(std::string &out, const Expr &e, int min_prec) {
    if (precedence(e) < min_prec) {
        out += '(';
        print(out, e);
        out += ')';
    } else {
        print(out, e);
    }
}

void print(std::string &out, const Expr &e) {
    switch (e.kind) {
    case Expr::Kind::Name: out += e.text; break;
    case Expr::Kind::Attr:
        print_operand(out, *e.operands[0], kAtom);
        out += '.';
        out += e.text;
        break;
    case Expr::Kind::Index:
        print_operand(out, *e.operands[0], kAtom);
        out += '[';
        print(out, *e.operands[1]);
        out += ']';
        break;
    case Expr::Kind::Len:
        out += "len(";
        print(out, *e.operands[0]);
        out += ')';
        break;
    case Expr::Kind::Call:
        out += to_string(e.fn);
        out += '(';
        for (std::size_t i = 0; i < e.operands.size(); ++i) {
            if (i) out += ", ";
            print(out, *e.operands[i]);
        }
        out += ')';
        break;
    case Expr::Kind::Number: out += e.is_int ? std::to_string(e.int_value) : format_float(e.float_value); break;
    case Expr::Kind::None: out += "None"; break;
    case Expr::Kind::IsNone:
        print_operand(out, *e.operands[0], kCompare + 1);
        out += e.negated ? " is not None" : " is None";
        break;
    case Expr::Kind::Unary:
        if (e.unary_op == UnaryOp::Not) {
            out += "not ";
            print_operand(out, *e.operands[0], kNot);
        } else {
            out += '-';
            print_operand(out, *e.operands[0], kUnary);
        }
        break;
    case Expr::Kind::Binary: {
        int p = precedence(e);
        // Comparisons do not chain, so both sides must bind tighter.
        int lhs_min = p == kCompare ? p + 1 : p;
        print_operand(out, *e.operands[0], lhs_min);
        out += ' ';
        out += to_string(e.binary_op);
        out += ' ';
        print_operand(out, *e.operands[1], p + 1);
        break;
    }
    }
}

void print_block(std::string &out, const std::vector<StmtPtr> &stmts, int depth);

void print_stmt(std::string &out, const Stmt &s, int depth) {
    std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    out += pad;
    switch (s.kind) {
    case Stmt::Kind::ForEach:
        out += "for " + s.target + " in ";
        print(out, *s.first);
        out += ":\n";
        print_block(out, s.body, depth + 1);
        break;
    case Stmt::Kind::ForRange:
        out += "for " + s.target + " in range(";
        if (s.first) {
            print(out, *s.first);
            out += ", ";
        }
        print(out, *s.second);
        out += "):\n";
        print_block(out, s.body, depth + 1);
        break;
    case Stmt::Kind::If: {
        out += "if ";
        print(out, *s.first);
        out += ":\n";
        print_block(out, s.body, depth + 1);
        const Stmt *cur = &s;
        while (cur->orelse.size() == 1 && cur->orelse.front()->kind == Stmt::Kind::If) {
            cur = cur->orelse.front().get();
            out += pad + "elif ";
            print(out, *cur->first);
            out += ":\n";
            print_block(out, cur->body, depth + 1);
        }
        if (!cur->orelse.empty()) {
            out += pad + "else:\n";
            print_block(out, cur->orelse, depth + 1);
        }
        break;
    }
    case Stmt::Kind::Assign:
        out += s.target + " = ";
        print(out, *s.first);
        out += '\n';
        break;
    case Stmt::Kind::Fill:
        out += "fill_histogram(";
        if (!s.target.empty()) out += s.target + ", ";
        print(out, *s.first);
        out += ")\n";
        break;
    }
}

void print_block(std::string &out, const std::vector<StmtPtr> &stmts, int depth) {
    for (const auto &s : stmts) print_stmt(out, *s, depth);
}

}  // namespace

std::string print_expr(const Expr &expr) {
    std::string out;
    print(out, expr);
    return out;
}

std::string print_ast(const QueryAst &ast) {
    std::string out;
    print_block(out, ast.statements, 0);
    return out;
}

}  // namespace flatq::lang
