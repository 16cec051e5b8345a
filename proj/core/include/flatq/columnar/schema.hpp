#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flatq::columnar {

enum class PrimitiveKind : std::uint8_t { Float64, Int64, Char };

std::string_view to_string(PrimitiveKind kind);
/// Size of one stored element in bytes.
std::size_t element_width(PrimitiveKind kind);

class SchemaNode;
using SchemaNodePtr = std::shared_ptr<const SchemaNode>;

struct SchemaField {
    std::string name;
    SchemaNodePtr type;
};

/// One node of a logical type tree: List(child) | Record(fields) | Primitive(kind).
/// Nodes are immutable and shared; build them with the static factories.
class SchemaNode {
public:
    enum class Kind : std::uint8_t { List, Record, Primitive };

    static SchemaNodePtr list(SchemaNodePtr item);
    static SchemaNodePtr record(std::vector<SchemaField> fields);
    static SchemaNodePtr primitive(PrimitiveKind kind);

    Kind kind() const { return kind_; }
    bool is_list() const { return kind_ == Kind::List; }
    bool is_record() const { return kind_ == Kind::Record; }
    bool is_primitive() const { return kind_ == Kind::Primitive; }

    const SchemaNode &item() const;
    const SchemaNodePtr &item_ptr() const { return item_; }
    const std::vector<SchemaField> &fields() const { return fields_; }
    PrimitiveKind primitive_kind() const { return primitive_; }

    /// Index of the field called `name`, or -1.
    int field_index(std::string_view name) const;

    friend bool operator==(const SchemaNode &a, const SchemaNode &b);

private:
    SchemaNode() = default;

    Kind kind_ = Kind::Primitive;
    SchemaNodePtr item_;
    std::vector<SchemaField> fields_;
    PrimitiveKind primitive_ = PrimitiveKind::Float64;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * A dataset schema: the root is always a List whose items are the events.
 *
 * Every node below the root has a path string used to name its arrays:
 *  - the root list is the empty path, and so are record items of a list;
 *  - a record field appends `.name` (no leading dot at the root);
 *  - a list item that is itself a list or a primitive appends `.item`.
 * With List(Record{muons: List(Record{pt})}) the muon offsets live at
 * `muons` and the pt attribute at `muons.pt`.
 */
class Schema {
public:
    explicit Schema(SchemaNodePtr root);

    const SchemaNode &root() const { return *root_; }
    const SchemaNodePtr &root_ptr() const { return root_; }

    friend bool operator==(const Schema &a, const Schema &b) { return *a.root_ == *b.root_; }

private:
    SchemaNodePtr root_;
};

/// True when `name` is a valid field name (an identifier).
bool is_identifier(std::string_view name);

std::string join_path(std::string_view parent, std::string_view step);
/// Path of the item node of a list at `list_path`.
std::string item_path(std::string_view list_path, const SchemaNode &item);

/// Schema used by the synthetic event generator and the bundled query corpus.
Schema event_schema();
/// Schema of the nested list-of-lists-of-pairs fixture.
Schema pair_fixture_schema();

}  // namespace flatq::columnar
