#pragma once

#include "flatq/exec/histogram.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace flatq::exec {

/// A query file plus the histograms it declares.
struct CorpusQuery {
    std::string name;  // file stem
    std::string source;
    std::vector<HistogramSpec> specs;
};

/// Specs from `# hist: name:bins:lo:hi` comment lines, in order.
std::vector<HistogramSpec> parse_hist_directives(std::string_view source);

/// Throws std::runtime_error if the file cannot be read.
CorpusQuery load_query_file(const std::filesystem::path &path);

/// Every `*.q` file in `dir`, sorted by name.
std::vector<CorpusQuery> load_corpus(const std::filesystem::path &dir);

/// Looks a query up by name; throws std::out_of_range if absent.
const CorpusQuery &find_query(const std::vector<CorpusQuery> &corpus, std::string_view name);

}  // namespace flatq::exec
