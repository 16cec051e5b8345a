#pragma once

#include "flatq/columnar/logical.hpp"
#include "flatq/columnar/schema.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace flatq::columnar {

/// One attribute array. Char attributes are stored as raw bytes.
using Column = std::variant<std::vector<double>, std::vector<std::int64_t>, std::vector<std::uint8_t>>;

PrimitiveKind column_kind(const Column &column);
std::size_t column_size(const Column &column);

enum class ArrayRole : std::uint8_t { Offsets, Attribute };

struct ArrayInfo {
    std::string path;
    ArrayRole role;
    PrimitiveKind dtype;  // Int64 for offsets
};

/// Every array a dataset of `schema` carries, in schema pre-order.
std::vector<ArrayInfo> array_layout(const Schema &schema);

struct Violation {
    std::string path;
    std::int64_t index;  // -1 when the violation is about the whole array
    std::string rule;
    std::string message;
};

struct ValidationError : std::runtime_error {
    explicit ValidationError(std::vector<Violation> v);
    std::vector<Violation> violations;
};

struct SchemaViolationError : std::runtime_error {
    SchemaViolationError(std::string path, const std::string &what)
        : std::runtime_error(what), path(std::move(path)) {}
    std::string path;
};

struct BoundsError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

/**
 * Exploded nested data: one offsets array per non-root list node and one
 * attribute array per primitive node, keyed by schema path. The root list
 * has no offsets array; its length is `num_entries()`.
 *
 * Immutable after construction. The constructor does not validate; use
 * validate() or make_validated().
 */
class ColumnarDataset {
public:
    ColumnarDataset(Schema schema, std::int64_t num_entries,
                    std::map<std::string, std::vector<std::int64_t>> offsets,
                    std::map<std::string, Column> attributes);

    static ColumnarDataset make_validated(Schema schema, std::int64_t num_entries,
                                          std::map<std::string, std::vector<std::int64_t>> offsets,
                                          std::map<std::string, Column> attributes);

    const Schema &schema() const { return schema_; }
    std::int64_t num_entries() const { return num_entries_; }

    bool has_offsets(const std::string &path) const { return offsets_.count(path) != 0; }
    bool has_attribute(const std::string &path) const { return attributes_.count(path) != 0; }
    std::span<const std::int64_t> offsets(const std::string &path) const;
    const Column &attribute(const std::string &path) const;

    const std::map<std::string, std::vector<std::int64_t>> &all_offsets() const { return offsets_; }
    const std::map<std::string, Column> &all_attributes() const { return attributes_; }

    /// Total payload bytes across all arrays.
    std::int64_t byte_size() const;

    /// Array-for-array equality; floats compare bitwise.
    friend bool operator==(const ColumnarDataset &a, const ColumnarDataset &b);

private:
    Schema schema_;
    std::int64_t num_entries_;
    std::map<std::string, std::vector<std::int64_t>> offsets_;
    std::map<std::string, Column> attributes_;
};

/// Empty list iff every structural invariant holds.
std::vector<Violation> validate(const ColumnarDataset &dataset);

/// Shreds a logical value into arrays. Throws SchemaViolationError on shape mismatch.
ColumnarDataset explode(const LogicalValue &value, const Schema &schema);

/// Rebuilds the full logical value. Throws ValidationError on an invalid dataset.
LogicalValue materialize(const ColumnarDataset &dataset);

/// Materializes one root entry.
LogicalValue materialize_entry(const ColumnarDataset &dataset, std::int64_t entry);

/// Materializes root entries one at a time; array pointers are bound once.
/// The dataset must be valid and outlive the materializer.
class EntryMaterializer {
public:
    struct ReadNode;

    explicit EntryMaterializer(const ColumnarDataset &dataset);
    ~EntryMaterializer();
    EntryMaterializer(EntryMaterializer &&) noexcept = default;
    EntryMaterializer &operator=(EntryMaterializer &&) noexcept = default;

    LogicalValue operator()(std::int64_t entry) const;
    std::int64_t num_entries() const { return num_entries_; }

private:
    std::unique_ptr<ReadNode> root_;
    std::int64_t num_entries_;
};

/// Root entries [begin, end) with offsets re-based to zero.
ColumnarDataset slice(const ColumnarDataset &dataset, std::int64_t begin, std::int64_t end);

/// Payload bytes of slice(dataset, begin, end) without building it.
std::int64_t slice_byte_size(const ColumnarDataset &dataset, std::int64_t begin, std::int64_t end);

struct Partition {
    std::string dataset_id;
    int index = 0;
    std::int64_t begin = 0;
    std::int64_t end = 0;
    std::int64_t byte_size = 0;

    std::int64_t num_entries() const { return end - begin; }
    friend bool operator==(const Partition &, const Partition &) = default;
};

/// Splits [0, num_entries) into `count` contiguous, near-equal ranges.
std::vector<Partition> make_partitions(const ColumnarDataset &dataset, const std::string &dataset_id,
                                       int count);

}  // namespace flatq::columnar
