#pragma once

#include "flatq/lang/ast.hpp"
#include "flatq/lang/diagnostic.hpp"

#include <string>
#include <string_view>

namespace flatq::lang {

/**
 * Parses an analysis function.
 *
 * Statement per line, blocks by indentation (spaces only; the first line of
 * a block fixes its width). Newlines inside brackets continue the line and
 * `#` starts a comment. Throws QueryError with a span on any error.
 */
QueryAst parse(std::string_view source);

/// Canonical source text; parse(print_ast(a)) == a. Blocks indent by two spaces.
std::string print_ast(const QueryAst &ast);
std::string print_expr(const Expr &expr);

/// JSON mirror of the Stmt/Expr trees for programmatic clients (schema in docs/query-json.md).
std::string ast_to_json(const QueryAst &ast, bool with_spans = false);
/// Throws QueryError (kind Syntax) on malformed JSON or unknown node kinds.
QueryAst ast_from_json(std::string_view text);

}  // namespace flatq::lang
