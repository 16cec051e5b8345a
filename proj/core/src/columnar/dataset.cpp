#include "flatq/columnar/dataset.hpp"

#include <algorithm>
#include <bit>
#include <optional>
#include <sstream>

namespace flatq::columnar {

namespace {

template <class T>
bool bitwise_equal(const std::vector<T> &a, const std::vector<T> &b) {
    if (a.size() != b.size()) return false;
    if constexpr (std::is_same_v<T, double>) {
        for (std::size_t i = 0; i < a.size(); ++i)
            if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
        return true;
    } else {
        return a == b;
    }
}

Column empty_column(PrimitiveKind kind) {
    switch (kind) {
    case PrimitiveKind::Float64: return std::vector<double>{};
    case PrimitiveKind::Int64: return std::vector<std::int64_t>{};
    case PrimitiveKind::Char: return std::vector<std::uint8_t>{};
    }
    return std::vector<double>{};
}

void layout_node(const SchemaNode &node, const std::string &path, bool is_root, std::vector<ArrayInfo> &out) {
    switch (node.kind()) {
    case SchemaNode::Kind::List:
        if (!is_root) out.push_back({path, ArrayRole::Offsets, PrimitiveKind::Int64});
        layout_node(node.item(), is_root ? item_path("", node.item()) : item_path(path, node.item()), false,
                    out);
        break;
    case SchemaNode::Kind::Record:
        for (const auto &f : node.fields()) layout_node(*f.type, join_path(path, f.name), false, out);
        break;
    case SchemaNode::Kind::Primitive:
        out.push_back({path, ArrayRole::Attribute, node.primitive_kind()});
        break;
    }
}

// Schema tree with paths resolved once, so per-element recursion does no string work.
struct PlanNode {
    const SchemaNode *node = nullptr;
    std::string path;
    std::vector<PlanNode> children;
};

PlanNode make_plan(const SchemaNode &node, std::string path) {
    PlanNode plan{&node, std::move(path), {}};
    if (node.is_list()) {
        plan.children.push_back(make_plan(node.item(), item_path(plan.path, node.item())));
    } else if (node.is_record()) {
        for (const auto &f : node.fields()) plan.children.push_back(make_plan(*f.type, join_path(plan.path, f.name)));
    }
    return plan;
}

PlanNode root_item_plan(const Schema &schema) {
    return make_plan(schema.root().item(), item_path("", schema.root().item()));
}

// ---- validation ----

class Validator {
public:
    explicit Validator(const ColumnarDataset &ds) : ds_(ds) {}

    std::vector<Violation> run() {
        if (ds_.num_entries() < 0) {
            add("", -1, "num-entries", "num_entries is negative");
            return std::move(out_);
        }
        auto plan = root_item_plan(ds_.schema());
        std::int64_t count = ds_.num_entries();
        if (auto natural = natural_count(plan); natural && *natural != count) {
            add(plan.path, -1, "num-entries",
                "root item count " + std::to_string(*natural) + " disagrees with num_entries " +
                    std::to_string(count));
            count = *natural;
        }
        check(plan, count);
        check_unexpected();
        return std::move(out_);
    }

private:
    void add(const std::string &path, std::int64_t index, std::string rule, std::string message) {
        out_.push_back({path, index, std::move(rule), std::move(message)});
    }

    std::optional<std::int64_t> natural_count(const PlanNode &plan) const {
        switch (plan.node->kind()) {
        case SchemaNode::Kind::List:
            if (!ds_.has_offsets(plan.path)) return std::nullopt;
            if (auto o = ds_.offsets(plan.path); !o.empty()) return static_cast<std::int64_t>(o.size()) - 1;
            return std::nullopt;
        case SchemaNode::Kind::Record:
            for (const auto &child : plan.children)
                if (auto n = natural_count(child)) return n;
            return std::nullopt;
        case SchemaNode::Kind::Primitive:
            if (!ds_.has_attribute(plan.path)) return std::nullopt;
            return static_cast<std::int64_t>(column_size(ds_.attribute(plan.path)));
        }
        return std::nullopt;
    }

    void check(const PlanNode &plan, std::int64_t expected) {
        switch (plan.node->kind()) {
        case SchemaNode::Kind::List: check_list(plan, expected); break;
        case SchemaNode::Kind::Record:
            for (const auto &child : plan.children) check(child, expected);
            break;
        case SchemaNode::Kind::Primitive: check_primitive(plan, expected); break;
        }
    }

    void check_list(const PlanNode &plan, std::int64_t expected) {
        if (!ds_.has_offsets(plan.path)) {
            add(plan.path, -1, "missing-array", "offsets array is missing");
            return;
        }
        auto o = ds_.offsets(plan.path);
        if (static_cast<std::int64_t>(o.size()) != expected + 1)
            add(plan.path, -1, "length",
                "offsets length " + std::to_string(o.size()) + ", expected " + std::to_string(expected + 1));
        if (o.empty()) return;
        if (o[0] != 0) add(plan.path, 0, "offsets-start", "offsets must begin with 0, found " + std::to_string(o[0]));
        for (std::size_t i = 1; i < o.size(); ++i)
            if (o[i] < o[i - 1])
                add(plan.path, static_cast<std::int64_t>(i), "monotonic",
                    "offsets decrease from " + std::to_string(o[i - 1]) + " to " + std::to_string(o[i]));
        const auto &child = plan.children.front();
        std::int64_t terminal = o.back();
        std::int64_t child_count = terminal;
        if (auto natural = natural_count(child); natural && *natural != terminal) {
            add(plan.path, static_cast<std::int64_t>(o.size()) - 1, "terminal-count",
                "last offset " + std::to_string(terminal) + " but the next level holds " + std::to_string(*natural) +
                    " elements");
            child_count = *natural;
        }
        check(child, std::max<std::int64_t>(child_count, 0));
    }

    void check_primitive(const PlanNode &plan, std::int64_t expected) {
        if (!ds_.has_attribute(plan.path)) {
            add(plan.path, -1, "missing-array", "attribute array is missing");
            return;
        }
        const auto &col = ds_.attribute(plan.path);
        if (column_kind(col) != plan.node->primitive_kind())
            add(plan.path, -1, "dtype",
                "attribute stored as " + std::string(to_string(column_kind(col))) + ", schema says " +
                    std::string(to_string(plan.node->primitive_kind())));
        if (static_cast<std::int64_t>(column_size(col)) != expected)
            add(plan.path, -1, "length",
                "attribute length " + std::to_string(column_size(col)) + ", expected " + std::to_string(expected));
    }

    void check_unexpected() {
        auto layout = array_layout(ds_.schema());
        auto known = [&](const std::string &p, ArrayRole role) {
            return std::any_of(layout.begin(), layout.end(),
                               [&](const ArrayInfo &a) { return a.path == p && a.role == role; });
        };
        for (const auto &[p, _] : ds_.all_offsets())
            if (!known(p, ArrayRole::Offsets)) add(p, -1, "unexpected-array", "offsets array not in schema");
        for (const auto &[p, _] : ds_.all_attributes())
            if (!known(p, ArrayRole::Attribute)) add(p, -1, "unexpected-array", "attribute array not in schema");
    }

    const ColumnarDataset &ds_;
    std::vector<Violation> out_;
};

// ---- explode ----

struct Builders {
    std::map<std::string, std::vector<std::int64_t>> offsets;
    std::map<std::string, Column> attributes;
};

struct WriteNode {
    const SchemaNode *node;
    const std::string *path;
    std::vector<std::int64_t> *offsets = nullptr;
    Column *column = nullptr;
    std::vector<WriteNode> children;
};

WriteNode bind_writer(const PlanNode &plan, Builders &b) {
    WriteNode w{plan.node, &plan.path, nullptr, nullptr, {}};
    if (plan.node->is_list()) {
        w.offsets = &b.offsets.emplace(plan.path, std::vector<std::int64_t>{0}).first->second;
    } else if (plan.node->is_primitive()) {
        w.column = &b.attributes.emplace(plan.path, empty_column(plan.node->primitive_kind())).first->second;
    }
    for (const auto &c : plan.children) w.children.push_back(bind_writer(c, b));
    return w;
}

std::string value_kind(const LogicalValue &v) {
    switch (v.v.index()) {
    case 0: return "list";
    case 1: return "record";
    case 2: return "float64";
    case 3: return "int64";
    default: return "char";
    }
}

[[noreturn]] void shape_error(const WriteNode &w, const std::string &expected, const LogicalValue &got) {
    const std::string &p = *w.path;
    throw SchemaViolationError(p, "schema violation at '" + (p.empty() ? std::string("<event>") : p) + "': expected " +
                                      expected + ", got " + value_kind(got));
}

void put(const WriteNode &w, const LogicalValue &v) {
    switch (w.node->kind()) {
    case SchemaNode::Kind::List: {
        if (!v.is_list()) shape_error(w, "list", v);
        const auto &items = v.list().items;
        for (const auto &item : items) put(w.children.front(), item);
        w.offsets->push_back(w.offsets->back() + static_cast<std::int64_t>(items.size()));
        break;
    }
    case SchemaNode::Kind::Record: {
        if (!v.is_record()) shape_error(w, "record", v);
        const auto &fields = v.record().fields;
        if (fields.size() != w.children.size())
            throw SchemaViolationError(*w.path, "schema violation at '" + *w.path + "': record has " +
                                                    std::to_string(fields.size()) + " fields, schema has " +
                                                    std::to_string(w.children.size()));
        for (std::size_t i = 0; i < fields.size(); ++i) put(w.children[i], fields[i]);
        break;
    }
    case SchemaNode::Kind::Primitive:
        switch (w.node->primitive_kind()) {
        case PrimitiveKind::Float64:
            if (auto *x = std::get_if<double>(&v.v)) std::get<std::vector<double>>(*w.column).push_back(*x);
            else shape_error(w, "float64", v);
            break;
        case PrimitiveKind::Int64:
            if (auto *x = std::get_if<std::int64_t>(&v.v)) std::get<std::vector<std::int64_t>>(*w.column).push_back(*x);
            else shape_error(w, "int64", v);
            break;
        case PrimitiveKind::Char:
            if (auto *x = std::get_if<char>(&v.v))
                std::get<std::vector<std::uint8_t>>(*w.column).push_back(static_cast<std::uint8_t>(*x));
            else shape_error(w, "char", v);
            break;
        }
        break;
    }
}

// ---- slicing ----

void slice_node(const PlanNode &plan, const ColumnarDataset &ds, std::int64_t b, std::int64_t e, Builders &out) {
    switch (plan.node->kind()) {
    case SchemaNode::Kind::List: {
        auto o = ds.offsets(plan.path);
        std::vector<std::int64_t> rebased;
        rebased.reserve(static_cast<std::size_t>(e - b + 1));
        for (std::int64_t i = b; i <= e; ++i) rebased.push_back(o[i] - o[b]);
        out.offsets.emplace(plan.path, std::move(rebased));
        slice_node(plan.children.front(), ds, o[b], o[e], out);
        break;
    }
    case SchemaNode::Kind::Record:
        for (const auto &c : plan.children) slice_node(c, ds, b, e, out);
        break;
    case SchemaNode::Kind::Primitive:
        out.attributes.emplace(plan.path, std::visit(
                                              [&](const auto &vec) -> Column {
                                                  using V = std::decay_t<decltype(vec)>;
                                                  return V(vec.begin() + b, vec.begin() + e);
                                              },
                                              ds.attribute(plan.path)));
        break;
    }
}

std::int64_t slice_bytes(const PlanNode &plan, const ColumnarDataset &ds, std::int64_t b, std::int64_t e) {
    switch (plan.node->kind()) {
    case SchemaNode::Kind::List: {
        auto o = ds.offsets(plan.path);
        return (e - b + 1) * 8 + slice_bytes(plan.children.front(), ds, o[b], o[e]);
    }
    case SchemaNode::Kind::Record: {
        std::int64_t total = 0;
        for (const auto &c : plan.children) total += slice_bytes(c, ds, b, e);
        return total;
    }
    case SchemaNode::Kind::Primitive:
        return (e - b) * static_cast<std::int64_t>(element_width(plan.node->primitive_kind()));
    }
    return 0;
}

void check_range(const ColumnarDataset &ds, std::int64_t begin, std::int64_t end) {
    if (begin < 0 || begin > end || end > ds.num_entries())
        throw BoundsError("entry range [" + std::to_string(begin) + ", " + std::to_string(end) +
                          ") outside [0, " + std::to_string(ds.num_entries()) + ")");
}

}  // namespace

// ---- public ----

PrimitiveKind column_kind(const Column &column) {
    switch (column.index()) {
    case 0: return PrimitiveKind::Float64;
    case 1: return PrimitiveKind::Int64;
    default: return PrimitiveKind::Char;
    }
}

std::size_t column_size(const Column &column) {
    return std::visit([](const auto &v) { return v.size(); }, column);
}

std::vector<ArrayInfo> array_layout(const Schema &schema) {
    std::vector<ArrayInfo> out;
    layout_node(schema.root(), "", true, out);
    return out;
}

ValidationError::ValidationError(std::vector<Violation> v)
    : std::runtime_error([&] {
          std::ostringstream os;
          os << "invalid columnar dataset (" << v.size() << " violation" << (v.size() == 1 ? "" : "s") << ")";
          for (const auto &x : v) {
              os << "\n  " << (x.path.empty() ? "<root>" : x.path);
              if (x.index >= 0) os << "[" << x.index << "]";
              os << ": " << x.rule << ": " << x.message;
          }
          return os.str();
      }()),
      violations(std::move(v)) {}

ColumnarDataset::ColumnarDataset(Schema schema, std::int64_t num_entries,
                                 std::map<std::string, std::vector<std::int64_t>> offsets,
                                 std::map<std::string, Column> attributes)
    : schema_(std::move(schema)),
      num_entries_(num_entries),
      offsets_(std::move(offsets)),
      attributes_(std::move(attributes)) {}

ColumnarDataset ColumnarDataset::make_validated(Schema schema, std::int64_t num_entries,
                                                std::map<std::string, std::vector<std::int64_t>> offsets,
                                                std::map<std::string, Column> attributes) {
    ColumnarDataset ds(std::move(schema), num_entries, std::move(offsets), std::move(attributes));
    if (auto v = validate(ds); !v.empty()) throw ValidationError(std::move(v));
    return ds;
}

std::span<const std::int64_t> ColumnarDataset::offsets(const std::string &path) const {
    auto it = offsets_.find(path);
    if (it == offsets_.end()) throw std::out_of_range("no offsets array at '" + path + "'");
    return it->second;
}

const Column &ColumnarDataset::attribute(const std::string &path) const {
    auto it = attributes_.find(path);
    if (it == attributes_.end()) throw std::out_of_range("no attribute array at '" + path + "'");
    return it->second;
}

std::int64_t ColumnarDataset::byte_size() const {
    std::int64_t total = 0;
    for (const auto &[_, o] : offsets_) total += static_cast<std::int64_t>(o.size()) * 8;
    for (const auto &[_, c] : attributes_)
        total += static_cast<std::int64_t>(column_size(c) * element_width(column_kind(c)));
    return total;
}

bool operator==(const ColumnarDataset &a, const ColumnarDataset &b) {
    if (!(a.schema_ == b.schema_) || a.num_entries_ != b.num_entries_) return false;
    if (a.offsets_ != b.offsets_) return false;
    if (a.attributes_.size() != b.attributes_.size()) return false;
    for (auto ia = a.attributes_.begin(), ib = b.attributes_.begin(); ia != a.attributes_.end(); ++ia, ++ib) {
        if (ia->first != ib->first || ia->second.index() != ib->second.index()) return false;
        bool same = std::visit(
            [&](const auto &va) {
                using V = std::decay_t<decltype(va)>;
                return bitwise_equal(va, std::get<V>(ib->second));
            },
            ia->second);
        if (!same) return false;
    }
    return true;
}

std::vector<Violation> validate(const ColumnarDataset &dataset) {
    return Validator(dataset).run();
}

ColumnarDataset explode(const LogicalValue &value, const Schema &schema) {
    if (!value.is_list()) throw SchemaViolationError("", "schema violation at root: expected list, got " + value_kind(value));
    auto plan = root_item_plan(schema);
    Builders b;
    auto writer = bind_writer(plan, b);
    const auto &events = value.list().items;
    for (std::size_t i = 0; i < events.size(); ++i) {
        try {
            put(writer, events[i]);
        } catch (const SchemaViolationError &e) {
            throw SchemaViolationError(e.path, std::string(e.what()) + " (entry " + std::to_string(i) + ")");
        }
    }
    return ColumnarDataset(schema, static_cast<std::int64_t>(events.size()), std::move(b.offsets),
                           std::move(b.attributes));
}

struct EntryMaterializer::ReadNode {
    SchemaNode::Kind kind;
    const std::int64_t *offsets = nullptr;
    const Column *column = nullptr;
    std::vector<ReadNode> children;
};

namespace {

EntryMaterializer::ReadNode bind_reader(const PlanNode &plan, const ColumnarDataset &ds) {
    EntryMaterializer::ReadNode r{plan.node->kind(), nullptr, nullptr, {}};
    if (plan.node->is_list()) r.offsets = ds.offsets(plan.path).data();
    if (plan.node->is_primitive()) r.column = &ds.attribute(plan.path);
    for (const auto &c : plan.children) r.children.push_back(bind_reader(c, ds));
    return r;
}

LogicalValue build(const EntryMaterializer::ReadNode &r, std::int64_t i) {
    switch (r.kind) {
    case SchemaNode::Kind::List: {
        ListValue list;
        std::int64_t b = r.offsets[i], e = r.offsets[i + 1];
        list.items.reserve(static_cast<std::size_t>(e - b));
        for (std::int64_t k = b; k < e; ++k) list.items.push_back(build(r.children.front(), k));
        return list;
    }
    case SchemaNode::Kind::Record: {
        RecordValue rec;
        rec.fields.reserve(r.children.size());
        for (const auto &c : r.children) rec.fields.push_back(build(c, i));
        return rec;
    }
    case SchemaNode::Kind::Primitive:
        switch (r.column->index()) {
        case 0: return std::get<0>(*r.column)[static_cast<std::size_t>(i)];
        case 1: return std::get<1>(*r.column)[static_cast<std::size_t>(i)];
        default: return static_cast<char>(std::get<2>(*r.column)[static_cast<std::size_t>(i)]);
        }
    }
    return {};
}

}  // namespace

EntryMaterializer::EntryMaterializer(const ColumnarDataset &dataset)
    : root_(std::make_unique<ReadNode>(bind_reader(root_item_plan(dataset.schema()), dataset))),
      num_entries_(dataset.num_entries()) {}

EntryMaterializer::~EntryMaterializer() = default;

LogicalValue EntryMaterializer::operator()(std::int64_t entry) const {
    return build(*root_, entry);
}

LogicalValue materialize(const ColumnarDataset &dataset) {
    if (auto v = validate(dataset); !v.empty()) throw ValidationError(std::move(v));
    EntryMaterializer m(dataset);
    ListValue out;
    out.items.reserve(static_cast<std::size_t>(dataset.num_entries()));
    for (std::int64_t i = 0; i < dataset.num_entries(); ++i) out.items.push_back(m(i));
    return out;
}

LogicalValue materialize_entry(const ColumnarDataset &dataset, std::int64_t entry) {
    if (entry < 0 || entry >= dataset.num_entries())
        throw BoundsError("entry " + std::to_string(entry) + " out of range");
    return EntryMaterializer(dataset)(entry);
}

ColumnarDataset slice(const ColumnarDataset &dataset, std::int64_t begin, std::int64_t end) {
    check_range(dataset, begin, end);
    Builders out;
    slice_node(root_item_plan(dataset.schema()), dataset, begin, end, out);
    return ColumnarDataset(dataset.schema(), end - begin, std::move(out.offsets), std::move(out.attributes));
}

std::int64_t slice_byte_size(const ColumnarDataset &dataset, std::int64_t begin, std::int64_t end) {
    check_range(dataset, begin, end);
    return slice_bytes(root_item_plan(dataset.schema()), dataset, begin, end);
}

std::vector<Partition> make_partitions(const ColumnarDataset &dataset, const std::string &dataset_id, int count) {
    if (count < 1) throw std::invalid_argument("partition count must be at least 1");
    std::vector<Partition> parts;
    parts.reserve(static_cast<std::size_t>(count));
    const std::int64_t n = dataset.num_entries();
    const std::int64_t base = n / count, extra = n % count;
    std::int64_t begin = 0;
    for (int i = 0; i < count; ++i) {
        std::int64_t end = begin + base + (i < extra ? 1 : 0);
        parts.push_back({dataset_id, i, begin, end, slice_byte_size(dataset, begin, end)});
        begin = end;
    }
    return parts;
}

}  // namespace flatq::columnar
