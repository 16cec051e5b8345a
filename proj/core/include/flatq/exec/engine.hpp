#pragma once

#include "flatq/columnar/dataset.hpp"
#include "flatq/compile/flat_program.hpp"
#include "flatq/compile/types.hpp"
#include "flatq/exec/histogram.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flatq::exec {

enum class Engine : std::uint8_t { Baseline, Flat, FlatFlattened };

std::string_view to_string(Engine e);
std::optional<Engine> engine_from_name(std::string_view name);

/// One histogram fill, in execution order.
struct Fill {
    int hist;  // index into the program's histogram list
    double value;
};
using FillTrace = std::vector<Fill>;

/// Same length, same histograms, bitwise-equal values.
bool same_fills(const FillTrace &a, const FillTrace &b);

/// The program does not fit the dataset (schema or arrays differ).
struct ProgramMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Runtime fault in the query itself, e.g. an index past the end of a list.
struct QueryRuntimeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
 * Interprets the typed AST over objects materialized one entry at a time.
 * `specs` must name exactly the query's histograms.
 */
HistogramMap run_baseline(const compile::TypedQuery &query, const columnar::ColumnarDataset &dataset,
                          const std::vector<HistogramSpec> &specs, FillTrace *trace = nullptr);

/// Runs a lowered program directly over the dataset arrays.
HistogramMap run_flat(const compile::FlatProgram &program, const columnar::ColumnarDataset &dataset,
                      const std::vector<HistogramSpec> &specs, FillTrace *trace = nullptr);

/// A query taken through every compilation stage.
struct CompiledQuery {
    std::string source;
    compile::TypedQuery typed;
    compile::FlatProgram flat;
    compile::FlatProgram flattened;
    std::vector<HistogramSpec> specs;
};

/**
 * Parses, type-checks and lowers `source`. The spec names are the declared
 * histograms. Throws lang::QueryError on diagnostics and
 * std::invalid_argument on bad specs.
 */
CompiledQuery compile_query(std::string source, const columnar::Schema &schema, std::vector<HistogramSpec> specs);

HistogramMap run(const CompiledQuery &query, const columnar::ColumnarDataset &dataset, Engine engine,
                 FillTrace *trace = nullptr);

}  // namespace flatq::exec
