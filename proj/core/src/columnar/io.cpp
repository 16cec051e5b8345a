#include "flatq/columnar/io.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace flatq::columnar {

using nlohmann::json;

namespace {

constexpr std::string_view kFormatName = "flatq-columnar";
constexpr int kFormatVersion = 1;

[[noreturn]] void format_error(const std::string &what) { throw IoError(IoErrorKind::Format, what); }

std::string_view extension(PrimitiveKind kind) {
    switch (kind) {
    case PrimitiveKind::Float64: return "f64";
    case PrimitiveKind::Int64: return "i64";
    case PrimitiveKind::Char: return "u8";
    }
    return "bin";
}

PrimitiveKind parse_kind(const std::string &s) {
    if (s == "float64") return PrimitiveKind::Float64;
    if (s == "int64") return PrimitiveKind::Int64;
    if (s == "char") return PrimitiveKind::Char;
    format_error("unknown primitive type '" + s + "'");
}

void require_keys(const json &j, std::initializer_list<std::string_view> allowed, const char *what) {
    if (!j.is_object()) format_error(std::string(what) + " must be a JSON object");
    for (const auto &[k, _] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || k == a;
        if (!ok) format_error("unknown key '" + k + "' in " + what);
    }
}

json node_to_json(const SchemaNode &node) {
    switch (node.kind()) {
    case SchemaNode::Kind::List: return {{"type", "list"}, {"item", node_to_json(node.item())}};
    case SchemaNode::Kind::Record: {
        json fields = json::array();
        for (const auto &f : node.fields()) fields.push_back({{"name", f.name}, {"type", node_to_json(*f.type)}});
        return {{"type", "record"}, {"fields", std::move(fields)}};
    }
    case SchemaNode::Kind::Primitive: return {{"type", std::string(to_string(node.primitive_kind()))}};
    }
    return {};
}

SchemaNodePtr node_from_json(const json &j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) format_error("schema node needs a 'type' string");
    auto type = j["type"].get<std::string>();
    try {
        if (type == "list") {
            require_keys(j, {"type", "item"}, "list node");
            if (!j.contains("item")) format_error("list node needs 'item'");
            return SchemaNode::list(node_from_json(j["item"]));
        }
        if (type == "record") {
            require_keys(j, {"type", "fields"}, "record node");
            if (!j.contains("fields") || !j["fields"].is_array()) format_error("record node needs a 'fields' array");
            std::vector<SchemaField> fields;
            for (const auto &f : j["fields"]) {
                require_keys(f, {"name", "type"}, "record field");
                if (!f.contains("name") || !f["name"].is_string() || !f.contains("type"))
                    format_error("record field needs 'name' and 'type'");
                fields.push_back({f["name"].get<std::string>(), node_from_json(f["type"])});
            }
            return SchemaNode::record(std::move(fields));
        }
        require_keys(j, {"type"}, "primitive node");
        return SchemaNode::primitive(parse_kind(type));
    } catch (const SchemaError &e) {
        format_error(e.what());
    }
}

json parse_json(std::string_view text, const char *what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error &e) {
        format_error(std::string(what) + ": " + e.what());
    }
}

std::string read_text(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError(IoErrorKind::MissingFile, "missing file " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path &p, const void *data, std::size_t size) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(IoErrorKind::Io, "cannot open " + p.string() + " for writing");
    out.write(static_cast<const char *>(data), static_cast<std::streamsize>(size));
    if (!out) throw IoError(IoErrorKind::Io, "write failed for " + p.string());
}

// Little-endian byte image of a numeric vector.
template <class T>
std::vector<std::uint8_t> to_le_bytes(const std::vector<T> &values) {
    std::vector<std::uint8_t> bytes(values.size() * sizeof(T));
    if (!values.empty()) std::memcpy(bytes.data(), values.data(), bytes.size());
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
        for (std::size_t i = 0; i < bytes.size(); i += sizeof(T)) std::reverse(bytes.begin() + i, bytes.begin() + i + sizeof(T));
    }
    return bytes;
}

template <class T>
std::vector<T> from_le_bytes(std::vector<std::uint8_t> bytes) {
    if constexpr (std::endian::native == std::endian::big && sizeof(T) > 1) {
        for (std::size_t i = 0; i < bytes.size(); i += sizeof(T)) std::reverse(bytes.begin() + i, bytes.begin() + i + sizeof(T));
    }
    std::vector<T> values(bytes.size() / sizeof(T));
    if (!values.empty()) std::memcpy(values.data(), bytes.data(), values.size() * sizeof(T));
    return values;
}

std::string role_name(ArrayRole role) { return role == ArrayRole::Offsets ? "offsets" : "attribute"; }

}  // namespace

std::string_view to_string(IoErrorKind kind) {
    switch (kind) {
    case IoErrorKind::MissingFile: return "missing-file";
    case IoErrorKind::LengthMismatch: return "length-mismatch";
    case IoErrorKind::ChecksumMismatch: return "checksum-mismatch";
    case IoErrorKind::Format: return "format";
    case IoErrorKind::Io: return "io";
    }
    return "?";
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError(IoErrorKind::Io, "SHA-256 computation failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

std::string schema_to_json(const Schema &schema) { return node_to_json(schema.root()).dump(2); }

Schema schema_from_json(std::string_view text) {
    auto root = node_from_json(parse_json(text, "schema.json"));
    try {
        return Schema(root);
    } catch (const SchemaError &e) {
        format_error(e.what());
    }
}

std::string manifest_to_json(const Manifest &manifest) {
    json arrays = json::array();
    for (const auto &a : manifest.arrays)
        arrays.push_back({{"path", a.path},
                          {"file", a.file},
                          {"role", role_name(a.role)},
                          {"dtype", std::string(to_string(a.dtype))},
                          {"length", a.length},
                          {"sha256", a.sha256}});
    json j = {{"format", kFormatName},
              {"version", kFormatVersion},
              {"num_entries", manifest.num_entries},
              {"arrays", std::move(arrays)}};
    return j.dump(2);
}

Manifest manifest_from_json(std::string_view text) {
    json j = parse_json(text, "manifest.json");
    require_keys(j, {"format", "version", "num_entries", "arrays"}, "manifest");
    try {
        if (j.at("format").get<std::string>() != kFormatName) format_error("manifest format is not " + std::string(kFormatName));
        if (j.at("version").get<int>() != kFormatVersion) format_error("unsupported manifest version");
        Manifest m;
        m.num_entries = j.at("num_entries").get<std::int64_t>();
        for (const auto &a : j.at("arrays")) {
            require_keys(a, {"path", "file", "role", "dtype", "length", "sha256"}, "manifest array");
            auto role = a.at("role").get<std::string>();
            if (role != "offsets" && role != "attribute") format_error("unknown array role '" + role + "'");
            m.arrays.push_back({a.at("path").get<std::string>(), a.at("file").get<std::string>(),
                                role == "offsets" ? ArrayRole::Offsets : ArrayRole::Attribute,
                                parse_kind(a.at("dtype").get<std::string>()), a.at("length").get<std::int64_t>(),
                                a.at("sha256").get<std::string>()});
        }
        return m;
    } catch (const json::exception &e) {
        format_error(std::string("malformed manifest: ") + e.what());
    }
}

Manifest write_dataset(const ColumnarDataset &dataset, const std::filesystem::path &directory) {
    if (auto v = validate(dataset); !v.empty()) throw ValidationError(std::move(v));
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw IoError(IoErrorKind::Io, "cannot create " + directory.string() + ": " + ec.message());

    Manifest manifest;
    manifest.num_entries = dataset.num_entries();
    for (const auto &info : array_layout(dataset.schema())) {
        std::vector<std::uint8_t> bytes;
        std::int64_t length = 0;
        if (info.role == ArrayRole::Offsets) {
            const auto &o = dataset.all_offsets().at(info.path);
            bytes = to_le_bytes(o);
            length = static_cast<std::int64_t>(o.size());
        } else {
            const auto &col = dataset.attribute(info.path);
            bytes = std::visit([](const auto &v) { return to_le_bytes(v); }, col);
            length = static_cast<std::int64_t>(column_size(col));
        }
        std::string file = info.path + "." + std::string(extension(info.dtype));
        write_bytes(directory / file, bytes.data(), bytes.size());
        manifest.arrays.push_back({info.path, file, info.role, info.dtype, length, sha256_hex(bytes)});
    }
    auto schema_text = schema_to_json(dataset.schema()) + "\n";
    write_bytes(directory / "schema.json", schema_text.data(), schema_text.size());
    auto manifest_text = manifest_to_json(manifest) + "\n";
    write_bytes(directory / "manifest.json", manifest_text.data(), manifest_text.size());
    return manifest;
}

ColumnarDataset read_dataset(const std::filesystem::path &directory) {
    Schema schema = schema_from_json(read_text(directory / "schema.json"));
    Manifest manifest = manifest_from_json(read_text(directory / "manifest.json"));

    auto layout = array_layout(schema);
    if (layout.size() != manifest.arrays.size())
        format_error("manifest lists " + std::to_string(manifest.arrays.size()) + " arrays, schema implies " +
                     std::to_string(layout.size()));

    std::map<std::string, std::vector<std::int64_t>> offsets;
    std::map<std::string, Column> attributes;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        const auto &want = layout[i];
        const auto &entry = manifest.arrays[i];
        if (entry.path != want.path || entry.role != want.role || entry.dtype != want.dtype)
            format_error("manifest entry '" + entry.path + "' does not match schema array '" + want.path + "'");
        if (entry.file.find('/') != std::string::npos || entry.file.find("..") != std::string::npos)
            format_error("manifest file name '" + entry.file + "' escapes the dataset directory");
        auto file = directory / entry.file;
        if (!std::filesystem::exists(file)) throw IoError(IoErrorKind::MissingFile, "missing array file " + file.string());
        auto text = read_text(file);
        std::vector<std::uint8_t> bytes(text.begin(), text.end());
        const auto width = static_cast<std::int64_t>(element_width(entry.dtype));
        if (entry.length < 0 || static_cast<std::int64_t>(bytes.size()) != entry.length * width)
            throw IoError(IoErrorKind::LengthMismatch, file.string() + " holds " + std::to_string(bytes.size()) +
                                                           " bytes, manifest says " + std::to_string(entry.length) +
                                                           " x " + std::to_string(width));
        if (sha256_hex(bytes) != entry.sha256)
            throw IoError(IoErrorKind::ChecksumMismatch, "checksum mismatch for " + file.string());
        switch (entry.dtype) {
        case PrimitiveKind::Int64:
            if (entry.role == ArrayRole::Offsets) offsets.emplace(entry.path, from_le_bytes<std::int64_t>(std::move(bytes)));
            else attributes.emplace(entry.path, from_le_bytes<std::int64_t>(std::move(bytes)));
            break;
        case PrimitiveKind::Float64: attributes.emplace(entry.path, from_le_bytes<double>(std::move(bytes))); break;
        case PrimitiveKind::Char: attributes.emplace(entry.path, std::move(bytes)); break;
        }
    }
    return ColumnarDataset::make_validated(std::move(schema), manifest.num_entries, std::move(offsets),
                                           std::move(attributes));
}

}  // namespace flatq::columnar
