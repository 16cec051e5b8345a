#pragma once

#include "flatq/lang/ast.hpp"

#include <stdexcept>
#include <string>

namespace flatq::lang {

enum class DiagnosticKind : std::uint8_t { Lex, Indentation, Syntax, UnknownFunction, Arity, Type };

std::string_view to_string(DiagnosticKind kind);

struct Diagnostic {
    DiagnosticKind kind;
    SourceSpan span;
    std::string message;

    /// `line:col: <kind> error: message`
    std::string format() const;
};

/// `origin:line:col: ...` followed by the offending source line and a caret marker.
std::string render(const Diagnostic &d, std::string_view source, std::string_view origin);

/// Thrown by the parser and the type checker.
class QueryError : public std::runtime_error {
public:
    explicit QueryError(Diagnostic d) : std::runtime_error(d.format()), diagnostic_(std::move(d)) {}
    const Diagnostic &diagnostic() const { return diagnostic_; }

private:
    Diagnostic diagnostic_;
};

}  // namespace flatq::lang
