#include "support.hpp"

#include "flatq/columnar/generator.hpp"
#include "flatq/columnar/io.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace flatq;
using namespace flatq::columnar;
using flatq::testing::pair_fixture_dataset;
using flatq::testing::pair_fixture_value;

namespace {

std::vector<std::int64_t> offsets_of(const ColumnarDataset &ds, const std::string &path) {
    auto s = ds.offsets(path);
    return {s.begin(), s.end()};
}

template <class T>
std::vector<T> column_of(const ColumnarDataset &ds, const std::string &path) {
    return std::get<std::vector<T>>(ds.attribute(path));
}

std::vector<std::uint8_t> chars(std::string_view s) { return {s.begin(), s.end()}; }

std::filesystem::path scratch_dir(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("flatq_test_columnar_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

ColumnarDataset with_offsets(const ColumnarDataset &ds, const std::string &path, std::vector<std::int64_t> values) {
    auto offsets = ds.all_offsets();
    offsets[path] = std::move(values);
    return ColumnarDataset(ds.schema(), ds.num_entries(), offsets, ds.all_attributes());
}

/// Concatenates logical values of two slices (both lists).
LogicalValue concat(const LogicalValue &a, const LogicalValue &b) {
    ListValue out = a.list();
    for (const auto &item : b.list().items) out.items.push_back(item);
    return out;
}

}  // namespace

TEST_SUITE("explode") {
    TEST_CASE("pair fixture explodes to the four flat arrays") {
        auto ds = explode(pair_fixture_value(), pair_fixture_schema());
        CHECK(offsets_of(ds, "item") == std::vector<std::int64_t>{0, 3, 3, 4});
        CHECK(offsets_of(ds, "item.item") == std::vector<std::int64_t>{0, 4, 4, 6, 7});
        CHECK(column_of<std::uint8_t>(ds, "item.item.first") == chars("abcdefg"));
        CHECK(column_of<std::int64_t>(ds, "item.item.second") == std::vector<std::int64_t>{1, 2, 3, 4, 5, 6, 7});
        CHECK(ds.num_entries() == 3);
        CHECK(ds == pair_fixture_dataset());
    }

    TEST_CASE("empty dataset") {
        auto ds = explode(ListValue{}, pair_fixture_schema());
        CHECK(offsets_of(ds, "item") == std::vector<std::int64_t>{0});
        CHECK(offsets_of(ds, "item.item") == std::vector<std::int64_t>{0});
        CHECK(column_of<std::uint8_t>(ds, "item.item.first").empty());
        CHECK(column_of<std::int64_t>(ds, "item.item.second").empty());
        CHECK(validate(ds).empty());
    }

    TEST_CASE("shape mismatch names the offending path") {
        // An event whose inner list holds a bare integer instead of a pair.
        LogicalValue bad = ListValue{{ListValue{{ListValue{{LogicalValue(std::int64_t{3})}}}}}};
        try {
            explode(bad, pair_fixture_schema());
            FAIL("expected a schema violation");
        } catch (const SchemaViolationError &e) {
            CHECK(std::string(e.what()).find("item.item") != std::string::npos);
        }
    }

    TEST_CASE("generator events round trip through materialize") {
        auto ds = generate_events(300, 5);
        CHECK(explode(materialize(ds), ds.schema()) == ds);
    }
}

TEST_SUITE("materialize") {
    TEST_CASE("pair fixture arrays give back the logical data") {
        CHECK(materialize(pair_fixture_dataset()) == pair_fixture_value());
    }

    TEST_CASE("empty arrays give an empty list") {
        auto ds = explode(ListValue{}, pair_fixture_schema());
        auto v = materialize(ds);
        CHECK(v.is_list());
        CHECK(v.list().items.empty());
    }

    TEST_CASE("invalid input is rejected") {
        auto ds = with_offsets(pair_fixture_dataset(), "item", {0, 3, 2, 4});
        CHECK_THROWS_AS(materialize(ds), ValidationError);
    }

    TEST_CASE("single entry matches the whole materialization") {
        auto ds = generate_events(50, 9);
        auto all = materialize(ds);
        for (std::int64_t i = 0; i < ds.num_entries(); ++i)
            CHECK(materialize_entry(ds, i) == all.list().items[static_cast<std::size_t>(i)]);
    }
}

TEST_SUITE("validate") {
    TEST_CASE("pair fixture is valid") { CHECK(validate(pair_fixture_dataset()).empty()); }

    TEST_CASE("decreasing offsets give one monotonicity violation") {
        auto v = validate(with_offsets(pair_fixture_dataset(), "item", {0, 3, 2, 4}));
        REQUIRE(v.size() == 1);
        CHECK(v[0].path == "item");
        CHECK(v[0].index == 2);
        CHECK(v[0].rule == "monotonic");
    }

    TEST_CASE("terminal offset disagreeing with the child count") {
        auto v = validate(with_offsets(pair_fixture_dataset(), "item", {0, 3, 3, 5}));
        REQUIRE(v.size() == 1);
        CHECK(v[0].path == "item");
        CHECK(v[0].rule == "terminal-count");
    }

    TEST_CASE("offsets must start at zero") {
        auto v = validate(with_offsets(pair_fixture_dataset(), "item.item", {1, 4, 4, 6, 7}));
        REQUIRE(!v.empty());
        CHECK(v[0].rule == "offsets-start");
    }

    TEST_CASE("attribute arrays of one record must agree in length") {
        auto attrs = pair_fixture_dataset().all_attributes();
        attrs["item.item.second"] = std::vector<std::int64_t>{1, 2, 3};
        ColumnarDataset ds(pair_fixture_schema(), 3, pair_fixture_dataset().all_offsets(), attrs);
        CHECK_FALSE(validate(ds).empty());
    }
}

TEST_SUITE("slice") {
    TEST_CASE("first entry of the pair fixture") {
        auto s = slice(pair_fixture_dataset(), 0, 1);
        CHECK(offsets_of(s, "item") == std::vector<std::int64_t>{0, 3});
        CHECK(offsets_of(s, "item.item") == std::vector<std::int64_t>{0, 4, 4, 6});
        CHECK(column_of<std::uint8_t>(s, "item.item.first") == chars("abcdef"));
        CHECK(column_of<std::int64_t>(s, "item.item.second") == std::vector<std::int64_t>{1, 2, 3, 4, 5, 6});
        CHECK(validate(s).empty());
        ListValue expected{{pair_fixture_value().list().items[0]}};
        CHECK(materialize(s) == LogicalValue(expected));
    }

    TEST_CASE("empty middle entry") {
        auto s = slice(pair_fixture_dataset(), 1, 2);
        CHECK(offsets_of(s, "item") == std::vector<std::int64_t>{0, 0});
        CHECK(offsets_of(s, "item.item") == std::vector<std::int64_t>{0});
        CHECK(column_of<std::uint8_t>(s, "item.item.first").empty());
    }

    TEST_CASE("last entry rebases offsets") {
        auto s = slice(pair_fixture_dataset(), 2, 3);
        CHECK(offsets_of(s, "item") == std::vector<std::int64_t>{0, 1});
        CHECK(offsets_of(s, "item.item") == std::vector<std::int64_t>{0, 1});
        CHECK(column_of<std::int64_t>(s, "item.item.second") == std::vector<std::int64_t>{7});
    }

    TEST_CASE("out of range") {
        auto ds = pair_fixture_dataset();
        CHECK_THROWS_AS(slice(ds, 2, 4), BoundsError);
        CHECK_THROWS_AS(slice(ds, -1, 1), BoundsError);
        CHECK_THROWS_AS(slice(ds, 2, 1), BoundsError);
    }

    TEST_CASE("slice byte size matches the sliced arrays") {
        auto ds = generate_events(1000, 2);
        CHECK(slice_byte_size(ds, 100, 700) == slice(ds, 100, 700).byte_size());
        CHECK(slice_byte_size(ds, 0, 1000) == ds.byte_size());
    }
}

TEST_SUITE("partitions") {
    TEST_CASE("contiguous, disjoint and covering") {
        auto ds = generate_events(1003, 4);
        for (int k : {1, 2, 7, 32, 1003, 2000}) {
            auto parts = make_partitions(ds, "d", k);
            REQUIRE(static_cast<int>(parts.size()) == k);
            std::int64_t at = 0;
            for (int i = 0; i < k; ++i) {
                CHECK(parts[static_cast<std::size_t>(i)].index == i);
                CHECK(parts[static_cast<std::size_t>(i)].begin == at);
                at = parts[static_cast<std::size_t>(i)].end;
            }
            CHECK(at == ds.num_entries());
        }
    }
}

TEST_SUITE("io") {
    TEST_CASE("pair fixture round trip is bit exact") {
        auto dir = scratch_dir("pairs");
        write_dataset(pair_fixture_dataset(), dir);
        CHECK(std::filesystem::exists(dir / "schema.json"));
        CHECK(std::filesystem::exists(dir / "manifest.json"));
        CHECK(std::filesystem::exists(dir / "item.item.first.u8"));
        CHECK(std::filesystem::exists(dir / "item.item.second.i64"));
        CHECK(read_dataset(dir) == pair_fixture_dataset());
    }

    TEST_CASE("empty round trip") {
        auto dir = scratch_dir("empty");
        auto ds = explode(ListValue{}, pair_fixture_schema());
        write_dataset(ds, dir);
        CHECK(read_dataset(dir) == ds);
    }

    TEST_CASE("float payload bits survive") {
        auto dir = scratch_dir("floats");
        flatq::testing::Rng rng(17);
        auto schema = event_schema();
        auto ds = explode(flatq::testing::random_value(rng, schema, 6), schema);
        write_dataset(ds, dir);
        CHECK(read_dataset(dir) == ds);
    }

    TEST_CASE("little-endian layout on disk") {
        auto dir = scratch_dir("layout");
        write_dataset(pair_fixture_dataset(), dir);
        std::ifstream in(dir / "item.i64", std::ios::binary);
        std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), {});
        REQUIRE(bytes.size() == 32);
        CHECK(bytes[8] == 3);
        CHECK(bytes[9] == 0);
    }

    TEST_CASE("truncated attribute file is a length error") {
        auto dir = scratch_dir("truncated");
        write_dataset(pair_fixture_dataset(), dir);
        std::filesystem::resize_file(dir / "item.item.second.i64", 20);
        try {
            read_dataset(dir);
            FAIL("expected an IoError");
        } catch (const IoError &e) {
            CHECK(e.kind == IoErrorKind::LengthMismatch);
        }
    }

    TEST_CASE("flipped byte is a checksum error") {
        auto dir = scratch_dir("flipped");
        write_dataset(pair_fixture_dataset(), dir);
        {
            std::fstream f(dir / "item.item.first.u8", std::ios::in | std::ios::out | std::ios::binary);
            f.seekp(2);
            f.put('z');
        }
        try {
            read_dataset(dir);
            FAIL("expected an IoError");
        } catch (const IoError &e) {
            CHECK(e.kind == IoErrorKind::ChecksumMismatch);
        }
    }

    TEST_CASE("missing file") {
        auto dir = scratch_dir("missing");
        write_dataset(pair_fixture_dataset(), dir);
        std::filesystem::remove(dir / "item.item.i64");
        try {
            read_dataset(dir);
            FAIL("expected an IoError");
        } catch (const IoError &e) {
            CHECK(e.kind == IoErrorKind::MissingFile);
        }
    }

    TEST_CASE("sha256 of a known string") {
        std::string abc = "abc";
        std::vector<std::uint8_t> bytes(abc.begin(), abc.end());
        CHECK(sha256_hex(bytes) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    TEST_CASE("schema json round trip") {
        flatq::testing::Rng rng(3);
        for (int i = 0; i < 50; ++i) {
            auto schema = flatq::testing::random_schema(rng);
            CHECK(schema_from_json(schema_to_json(schema)) == schema);
        }
    }
}

TEST_SUITE("generator") {
    TEST_CASE("zero events") {
        auto ds = generate_events(0, 1);
        CHECK(ds.num_entries() == 0);
        CHECK(validate(ds).empty());
    }

    TEST_CASE("deterministic") {
        CHECK(generate_events(10000, 42) == generate_events(10000, 42));
        CHECK_FALSE(generate_events(1000, 42) == generate_events(1000, 43));
    }

    TEST_CASE("mean multiplicity matches the truncated Poisson mean") {
        GeneratorParams p;
        const std::int64_t n = 100000;
        auto ds = generate_events(n, 1, p);
        CHECK(validate(ds).empty());

        // Poisson(lambda) conditioned on k <= max.
        double lambda = p.mean_multiplicity, pk = std::exp(-lambda), z = 0, m1 = 0, m2 = 0;
        for (int k = 0; k <= p.max_multiplicity; ++k) {
            z += pk;
            m1 += k * pk;
            m2 += double(k) * k * pk;
            pk *= lambda / (k + 1);
        }
        double mean = m1 / z, var = m2 / z - mean * mean;
        double sigma = std::sqrt(var / double(n));
        auto off = ds.offsets("muons");
        double observed = double(off.back()) / double(n);
        CHECK(std::abs(observed - mean) < 3 * sigma);

        std::int64_t longest = 0;
        for (std::size_t i = 1; i < off.size(); ++i) longest = std::max(longest, off[i] - off[i - 1]);
        CHECK(longest <= p.max_multiplicity);
    }

    TEST_CASE("attribute ranges") {
        GeneratorParams p;
        auto ds = generate_events(20000, 8, p);
        auto pt = std::get<std::vector<double>>(ds.attribute("muons.pt"));
        auto eta = std::get<std::vector<double>>(ds.attribute("muons.eta"));
        auto phi = std::get<std::vector<double>>(ds.attribute("muons.phi"));
        double sum = 0;
        for (double v : pt) {
            CHECK(v >= p.pt_offset);
            sum += v;
        }
        // Exponential mean plus offset, within 5 standard errors.
        double mean = sum / double(pt.size());
        CHECK(std::abs(mean - (p.pt_mean + p.pt_offset)) < 5 * p.pt_mean / std::sqrt(double(pt.size())));
        for (double v : eta) CHECK((v >= -p.eta_max && v < p.eta_max));
        for (double v : phi) CHECK((v >= -p.phi_max && v < p.phi_max));
    }
}

TEST_SUITE("properties") {
    TEST_CASE("explode/materialize round trips under the pair schema") {
        flatq::testing::Rng rng(2024);
        auto schema = pair_fixture_schema();
        for (int i = 0; i < 1000; ++i) {
            auto v = flatq::testing::random_value(rng, schema, 5);
            auto ds = explode(v, schema);
            REQUIRE(validate(ds).empty());
            REQUIRE(materialize(ds) == v);
            REQUIRE(explode(materialize(ds), schema) == ds);
        }
    }

    TEST_CASE("explode/materialize round trips under random schemas") {
        flatq::testing::Rng rng(77);
        for (int i = 0; i < 1000; ++i) {
            auto schema = flatq::testing::random_schema(rng);
            auto v = flatq::testing::random_value(rng, schema, 3);
            auto ds = explode(v, schema);
            REQUIRE(validate(ds).empty());
            REQUIRE(materialize(ds) == v);
        }
    }

    TEST_CASE("concatenated slices materialize to the whole") {
        flatq::testing::Rng rng(5);
        for (int i = 0; i < 300; ++i) {
            auto schema = i % 2 ? pair_fixture_schema() : flatq::testing::random_schema(rng);
            auto v = flatq::testing::random_value(rng, schema, 5);
            auto ds = explode(v, schema);
            auto n = ds.num_entries();
            auto s = std::uniform_int_distribution<std::int64_t>(0, n)(rng);
            auto a = slice(ds, 0, s), b = slice(ds, s, n);
            REQUIRE(validate(a).empty());
            REQUIRE(validate(b).empty());
            REQUIRE(concat(materialize(a), materialize(b)) == v);
        }
    }
}
