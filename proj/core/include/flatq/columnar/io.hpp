#pragma once

#include "flatq/columnar/dataset.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace flatq::columnar {

enum class IoErrorKind {
    MissingFile,
    LengthMismatch,
    ChecksumMismatch,
    Format,
    Io,
};

std::string_view to_string(IoErrorKind kind);

struct IoError : std::runtime_error {
    IoError(IoErrorKind kind, const std::string &what) : std::runtime_error(what), kind(kind) {}
    IoErrorKind kind;
};

struct ManifestEntry {
    std::string path;
    std::string file;
    ArrayRole role;
    PrimitiveKind dtype;
    std::int64_t length;
    std::string sha256;
};

struct Manifest {
    std::int64_t num_entries = 0;
    std::vector<ManifestEntry> arrays;
};

// JSON text forms of schema.json and manifest.json.
std::string schema_to_json(const Schema &schema);
Schema schema_from_json(std::string_view text);

std::string manifest_to_json(const Manifest &manifest);
Manifest manifest_from_json(std::string_view text);

/// Lowercase hex SHA-256 of a byte buffer.
std::string sha256_hex(std::span<const std::uint8_t> bytes);

/**
 * Writes `schema.json`, `manifest.json` and one little-endian binary file per
 * array (`<path>.i64`, `<path>.f64`, `<path>.u8`) into `directory`, creating
 * it if needed. Throws ValidationError when the dataset is invalid.
 */
Manifest write_dataset(const ColumnarDataset &dataset, const std::filesystem::path &directory);

/// Reads and verifies a directory produced by write_dataset.
ColumnarDataset read_dataset(const std::filesystem::path &directory);

}  // namespace flatq::columnar
