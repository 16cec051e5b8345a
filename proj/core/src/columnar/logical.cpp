#include "flatq/columnar/logical.hpp"

#include <bit>
#include <charconv>

namespace flatq::columnar {

bool operator==(const ListValue &a, const ListValue &b) { return a.items == b.items; }
bool operator==(const RecordValue &a, const RecordValue &b) { return a.fields == b.fields; }

bool operator==(const LogicalValue &a, const LogicalValue &b) {
    if (a.v.index() != b.v.index()) return false;
    if (auto *x = std::get_if<double>(&a.v))
        return std::bit_cast<std::uint64_t>(*x) == std::bit_cast<std::uint64_t>(std::get<double>(b.v));
    return a.v == b.v;
}

namespace {

void append(std::string &out, const LogicalValue &value) {
    switch (value.v.index()) {
    case 0: {
        out += '[';
        bool first = true;
        for (const auto &item : value.list().items) {
            if (!first) out += ", ";
            first = false;
            append(out, item);
        }
        out += ']';
        break;
    }
    case 1: {
        out += '(';
        bool first = true;
        for (const auto &f : value.record().fields) {
            if (!first) out += ", ";
            first = false;
            append(out, f);
        }
        out += ')';
        break;
    }
    case 2: {
        char buf[32];
        auto r = std::to_chars(buf, buf + sizeof buf, std::get<double>(value.v));
        out.append(buf, r.ptr);
        break;
    }
    case 3: out += std::to_string(std::get<std::int64_t>(value.v)); break;
    default:
        out += '\'';
        out += std::get<char>(value.v);
        out += '\'';
    }
}

}  // namespace

std::string to_string(const LogicalValue &value) {
    std::string out;
    append(out, value);
    return out;
}

}  // namespace flatq::columnar
