#pragma once

#include "flatq/columnar/dataset.hpp"
#include "flatq/lang/ast.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace flatq::testing {

/// The nested list-of-lists-of-pairs example, written out by hand.
columnar::LogicalValue pair_fixture_value();
/// Its arrays, also written out by hand (not produced by explode).
columnar::ColumnarDataset pair_fixture_dataset();

/// The triple loop over the pair fixture that fills `first` and `second`.
inline constexpr const char *kPairNestQuery =
    "for outerlist in dataset:\n"
    "  for innerlist in outerlist:\n"
    "    for pair in innerlist:\n"
    "      fill_histogram(first, pair.first)\n"
    "      fill_histogram(second, pair.second)\n";

using Rng = std::mt19937_64;

/// Random schema with a List root, depth at most `max_depth`.
columnar::Schema random_schema(Rng &rng, int max_depth = 4);
/// Random value conforming to `schema`; lists have 0..max_len items.
columnar::LogicalValue random_value(Rng &rng, const columnar::Schema &schema, int max_len = 4);

/// Random syntactically well-formed AST (it need not type-check).
lang::QueryAst random_ast(Rng &rng);

/**
 * Random query text over the event schema that always type-checks. Uses
 * nested muon loops, index loops, conditionals, None checks and scalar
 * accumulators; fills go to the single histogram `h`.
 */
std::string random_event_query(Rng &rng);

/**
 * Straight-line re-implementations of the corpus queries over materialized
 * events. Expressions are evaluated in the same order as the query text so
 * results can be compared bit for bit.
 */
std::vector<double> oracle_fills(const std::string &query, const columnar::LogicalValue &events);

/// Directory of the bundled corpus.
std::string corpus_dir();

}  // namespace flatq::testing
