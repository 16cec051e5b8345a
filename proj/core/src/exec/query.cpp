#include "flatq/exec/engine.hpp"
#include "flatq/lang/parser.hpp"

#include <bit>

namespace flatq::exec {

std::string_view to_string(Engine e) {
    switch (e) {
    case Engine::Baseline: return "baseline";
    case Engine::Flat: return "flat";
    case Engine::FlatFlattened: return "flat-flattened";
    }
    return "?";
}

std::optional<Engine> engine_from_name(std::string_view name) {
    for (auto e : {Engine::Baseline, Engine::Flat, Engine::FlatFlattened})
        if (to_string(e) == name) return e;
    return std::nullopt;
}

bool same_fills(const FillTrace &a, const FillTrace &b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i].hist != b[i].hist || std::bit_cast<std::uint64_t>(a[i].value) != std::bit_cast<std::uint64_t>(b[i].value))
            return false;
    return true;
}

CompiledQuery compile_query(std::string source, const columnar::Schema &schema, std::vector<HistogramSpec> specs) {
    std::vector<std::string> names;
    for (const auto &s : specs) {
        s.validate();
        names.push_back(s.name);
    }
    auto ast = lang::parse(source);
    auto typed = compile::infer_types(ast, schema, names);
    auto flat = compile::transform(typed);
    auto flattened = compile::flatten(flat);
    return CompiledQuery{std::move(source), std::move(typed), std::move(flat), std::move(flattened), std::move(specs)};
}

HistogramMap run(const CompiledQuery &query, const columnar::ColumnarDataset &dataset, Engine engine, FillTrace *trace) {
    switch (engine) {
    case Engine::Baseline: return run_baseline(query.typed, dataset, query.specs, trace);
    case Engine::Flat: return run_flat(query.flat, dataset, query.specs, trace);
    case Engine::FlatFlattened: return run_flat(query.flattened, dataset, query.specs, trace);
    }
    throw std::logic_error("unknown engine");
}

}  // namespace flatq::exec
