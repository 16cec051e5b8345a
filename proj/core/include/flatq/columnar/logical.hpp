#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace flatq::columnar {

struct LogicalValue;

struct ListValue {
    std::vector<LogicalValue> items;
};

/// Field values in schema order.
struct RecordValue {
    std::vector<LogicalValue> fields;
};

/// Row-oriented nested value: the "object" view of a dataset.
struct LogicalValue {
    std::variant<ListValue, RecordValue, double, std::int64_t, char> v;

    LogicalValue() : v(ListValue{}) {}
    LogicalValue(ListValue list) : v(std::move(list)) {}
    LogicalValue(RecordValue rec) : v(std::move(rec)) {}
    LogicalValue(double x) : v(x) {}
    LogicalValue(std::int64_t x) : v(x) {}
    LogicalValue(char c) : v(c) {}

    bool is_list() const { return std::holds_alternative<ListValue>(v); }
    bool is_record() const { return std::holds_alternative<RecordValue>(v); }
    const ListValue &list() const { return std::get<ListValue>(v); }
    const RecordValue &record() const { return std::get<RecordValue>(v); }
};

// Structural equality; doubles compare by bit pattern so NaN payloads round-trip.
bool operator==(const LogicalValue &a, const LogicalValue &b);
bool operator==(const ListValue &a, const ListValue &b);
bool operator==(const RecordValue &a, const RecordValue &b);

/// Compact literal form, e.g. `[[[('a', 1)]], []]`; records print as tuples.
std::string to_string(const LogicalValue &value);

}  // namespace flatq::columnar
