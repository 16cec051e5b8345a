#include "flatq/columnar/schema.hpp"

#include <set>

namespace flatq::columnar {

std::string_view to_string(PrimitiveKind kind) {
    switch (kind) {
    case PrimitiveKind::Float64: return "float64";
    case PrimitiveKind::Int64: return "int64";
    case PrimitiveKind::Char: return "char";
    }
    return "?";
}

std::size_t element_width(PrimitiveKind kind) {
    return kind == PrimitiveKind::Char ? 1 : 8;
}

SchemaNodePtr SchemaNode::list(SchemaNodePtr item) {
    if (!item) throw SchemaError("list node without an item type");
    auto node = std::shared_ptr<SchemaNode>(new SchemaNode());
    node->kind_ = Kind::List;
    node->item_ = std::move(item);
    return node;
}

SchemaNodePtr SchemaNode::record(std::vector<SchemaField> fields) {
    std::set<std::string, std::less<>> seen;
    for (const auto &f : fields) {
        if (!is_identifier(f.name))
            throw SchemaError("record field name '" + f.name + "' is not an identifier");
        if (!seen.insert(f.name).second) throw SchemaError("duplicate record field '" + f.name + "'");
        if (!f.type) throw SchemaError("record field '" + f.name + "' has no type");
    }
    auto node = std::shared_ptr<SchemaNode>(new SchemaNode());
    node->kind_ = Kind::Record;
    node->fields_ = std::move(fields);
    return node;
}

SchemaNodePtr SchemaNode::primitive(PrimitiveKind kind) {
    auto node = std::shared_ptr<SchemaNode>(new SchemaNode());
    node->kind_ = Kind::Primitive;
    node->primitive_ = kind;
    return node;
}

const SchemaNode &SchemaNode::item() const {
    if (kind_ != Kind::List) throw SchemaError("item() on a non-list schema node");
    return *item_;
}

int SchemaNode::field_index(std::string_view name) const {
    for (std::size_t i = 0; i < fields_.size(); ++i)
        if (fields_[i].name == name) return static_cast<int>(i);
    return -1;
}

bool operator==(const SchemaNode &a, const SchemaNode &b) {
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
    case SchemaNode::Kind::List: return *a.item_ == *b.item_;
    case SchemaNode::Kind::Primitive: return a.primitive_ == b.primitive_;
    case SchemaNode::Kind::Record:
        if (a.fields_.size() != b.fields_.size()) return false;
        for (std::size_t i = 0; i < a.fields_.size(); ++i)
            if (a.fields_[i].name != b.fields_[i].name || !(*a.fields_[i].type == *b.fields_[i].type))
                return false;
        return true;
    }
    return false;
}

Schema::Schema(SchemaNodePtr root) : root_(std::move(root)) {
    if (!root_ || !root_->is_list()) throw SchemaError("schema root must be a list");
}

bool is_identifier(std::string_view name) {
    if (name.empty()) return false;
    auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    if (!alpha(name[0])) return false;
    for (char c : name)
        if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
    return true;
}

std::string join_path(std::string_view parent, std::string_view step) {
    if (parent.empty()) return std::string(step);
    std::string out(parent);
    out += '.';
    out += step;
    return out;
}

std::string item_path(std::string_view list_path, const SchemaNode &item) {
    if (item.is_record()) return std::string(list_path);
    return join_path(list_path, "item");
}

Schema event_schema() {
    auto f64 = SchemaNode::primitive(PrimitiveKind::Float64);
    auto muon = SchemaNode::record({{"pt", f64}, {"eta", f64}, {"phi", f64}});
    auto event = SchemaNode::record({{"muons", SchemaNode::list(muon)}});
    return Schema(SchemaNode::list(event));
}

Schema pair_fixture_schema() {
    auto pair = SchemaNode::record({{"first", SchemaNode::primitive(PrimitiveKind::Char)},
                                    {"second", SchemaNode::primitive(PrimitiveKind::Int64)}});
    auto inner = SchemaNode::list(pair);
    auto outer = SchemaNode::list(inner);
    return Schema(SchemaNode::list(outer));
}

}  // namespace flatq::columnar
