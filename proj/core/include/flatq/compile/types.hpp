#pragma once

#include "flatq/columnar/schema.hpp"
#include "flatq/lang/ast.hpp"
#include "flatq/lang/diagnostic.hpp"

#include <string>
#include <unordered_map>
#include <vector>

namespace flatq::compile {

/// Static type of an expression or variable.
struct InferredType {
    enum class Kind : std::uint8_t { Dataset, List, RecordRef, OptionalRecordRef, F64, I64, Bool, None };

    Kind kind = Kind::None;
    /// Schema path of the list node (List) or record node (RecordRef, OptionalRecordRef).
    std::string path;
    const columnar::SchemaNode *node = nullptr;

    static InferredType dataset(const columnar::Schema &schema);
    static InferredType list(std::string path, const columnar::SchemaNode &node);
    static InferredType record(std::string path, const columnar::SchemaNode &node);
    static InferredType optional(std::string path, const columnar::SchemaNode &node);
    static InferredType f64() { return {Kind::F64, {}, nullptr}; }
    static InferredType i64() { return {Kind::I64, {}, nullptr}; }
    static InferredType boolean() { return {Kind::Bool, {}, nullptr}; }
    static InferredType none() { return {Kind::None, {}, nullptr}; }

    bool is_numeric() const { return kind == Kind::F64 || kind == Kind::I64; }
    /// Lists and record references, which compile to integer indices.
    bool is_object() const {
        return kind == Kind::List || kind == Kind::RecordRef || kind == Kind::OptionalRecordRef;
    }

    std::string to_string() const;
    friend bool operator==(const InferredType &a, const InferredType &b) {
        return a.kind == b.kind && a.path == b.path && a.node == b.node;
    }
};

struct VarInfo {
    std::string name;
    InferredType type;
    enum class Role : std::uint8_t { Assigned, ForEach, ForRange } role = Role::Assigned;
};

/**
 * A query AST annotated against a schema. Owns a private copy of the AST so
 * node addresses are unique keys for the side tables.
 */
struct TypedQuery {
    lang::QueryAst ast;
    columnar::Schema schema;
    std::vector<std::string> histograms;
    std::vector<VarInfo> vars;

    std::unordered_map<const lang::Expr *, InferredType> expr_types;
    /// Name expression -> variable id (absent for `dataset`).
    std::unordered_map<const lang::Expr *, int> name_vars;
    /// Assign / ForEach / ForRange statement -> variable id.
    std::unordered_map<const lang::Stmt *, int> stmt_vars;
    /// Fill statement -> histogram index.
    std::unordered_map<const lang::Stmt *, int> fill_hists;
    /// Attr expression -> field index in the record.
    std::unordered_map<const lang::Expr *, int> attr_fields;

    const InferredType &type_of(const lang::Expr &e) const { return expr_types.at(&e); }
};

/**
 * Propagates schema types through the query. Variables take the join of all
 * values assigned to them (I64 widens to F64; None joined with a record
 * reference gives an optional reference). Object-valued variables live
 * inside a single event-loop iteration and must be assigned before use.
 *
 * Throws lang::QueryError (kind Type) on the first error.
 */
TypedQuery infer_types(const lang::QueryAst &ast, const columnar::Schema &schema,
                       const std::vector<std::string> &histograms);

}  // namespace flatq::compile
