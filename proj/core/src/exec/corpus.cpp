#include "flatq/exec/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace flatq::exec {

std::vector<HistogramSpec> parse_hist_directives(std::string_view source) {
    std::vector<HistogramSpec> out;
    std::istringstream in{std::string(source)};
    std::string line;
    while (std::getline(in, line)) {
        auto pos = line.find_first_not_of(" \t");
        if (pos == std::string::npos || line[pos] != '#') continue;
        auto rest = line.substr(pos + 1);
        auto key = rest.find("hist:");
        if (key == std::string::npos || rest.find_first_not_of(" \t") != key) continue;
        auto spec = rest.substr(key + 5);
        spec.erase(0, spec.find_first_not_of(" \t"));
        spec.erase(spec.find_last_not_of(" \t\r") + 1);
        out.push_back(HistogramSpec::parse(spec));
    }
    return out;
}

CorpusQuery load_query_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read query file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    CorpusQuery q{path.stem().string(), buf.str(), {}};
    q.specs = parse_hist_directives(q.source);
    return q;
}

std::vector<CorpusQuery> load_corpus(const std::filesystem::path &dir) {
    std::vector<std::filesystem::path> files;
    for (const auto &entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".q") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    std::vector<CorpusQuery> out;
    for (const auto &f : files) out.push_back(load_query_file(f));
    return out;
}

const CorpusQuery &find_query(const std::vector<CorpusQuery> &corpus, std::string_view name) {
    for (const auto &q : corpus)
        if (q.name == name) return q;
    throw std::out_of_range("no query named '" + std::string(name) + "' in the corpus");
}

}  // namespace flatq::exec
