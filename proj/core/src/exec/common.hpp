#pragma once

#include "flatq/exec/engine.hpp"

#include <set>

namespace flatq::exec {

/// Histogram pointers in program order. The spec names must equal `names`.
inline std::vector<Histogram *> bind_histograms(HistogramMap &hists, const std::vector<std::string> &names) {
    std::set<std::string> want(names.begin(), names.end());
    std::set<std::string> have;
    for (const auto &kv : hists) have.insert(kv.first);
    if (want != have) {
        std::string w, h;
        for (const auto &n : want) w += (w.empty() ? "" : ", ") + n;
        for (const auto &n : have) h += (h.empty() ? "" : ", ") + n;
        throw std::invalid_argument("histogram specs {" + h + "} do not match the query's histograms {" + w + "}");
    }
    std::vector<Histogram *> out;
    for (const auto &n : names) out.push_back(&hists.at(n));
    return out;
}

[[noreturn]] inline void throw_index_error(std::int64_t idx, std::int64_t size) {
    throw QueryRuntimeError("list index " + std::to_string(idx) + " out of range for a list of length " +
                            std::to_string(size));
}

}  // namespace flatq::exec
