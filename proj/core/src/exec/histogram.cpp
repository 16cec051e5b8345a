#include "flatq/exec/histogram.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <numeric>

namespace flatq::exec {

using nlohmann::json;

void HistogramSpec::validate() const {
    if (name.empty()) throw std::invalid_argument("histogram name must not be empty");
    if (num_bins < 1) throw std::invalid_argument("histogram '" + name + "' needs at least one bin");
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
        throw std::invalid_argument("histogram '" + name + "' needs finite lo < hi");
}

namespace {

template <class T>
T parse_number(std::string_view s, const std::string &whole) {
    T v{};
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc{} || r.ptr != s.data() + s.size())
        throw std::invalid_argument("bad histogram spec '" + whole + "', expected name:bins:lo:hi");
    return v;
}

std::string format_double(double v) {
    char buf[40];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, r.ptr};
}

}  // namespace

HistogramSpec HistogramSpec::parse(std::string_view text) {
    std::string whole(text);
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    for (;;) {
        auto pos = text.find(':', start);
        parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    if (parts.size() != 4) throw std::invalid_argument("bad histogram spec '" + whole + "', expected name:bins:lo:hi");
    HistogramSpec spec{std::string(parts[0]), parse_number<int>(parts[1], whole), parse_number<double>(parts[2], whole),
                       parse_number<double>(parts[3], whole)};
    spec.validate();
    return spec;
}

std::string HistogramSpec::to_string() const {
    return name + ":" + std::to_string(num_bins) + ":" + format_double(lo) + ":" + format_double(hi);
}

Histogram::Histogram(HistogramSpec spec)
    : spec_(std::move(spec)), width_(0.0), counts_() {
    spec_.validate();
    width_ = spec_.bin_width();
    counts_.assign(static_cast<std::size_t>(spec_.num_bins), 0);
}

void Histogram::merge(const Histogram &other) {
    if (!(spec_ == other.spec_))
        throw AggregationError("cannot merge histogram " + other.spec_.to_string() + " into " + spec_.to_string());
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    underflow_ += other.underflow_;
    overflow_ += other.overflow_;
    num_fills_ += other.num_fills_;
}

Histogram Histogram::from_parts(HistogramSpec spec, std::vector<std::int64_t> counts, std::int64_t underflow,
                                std::int64_t overflow, std::int64_t num_fills) {
    Histogram h(std::move(spec));
    if (counts.size() != h.counts_.size()) throw std::invalid_argument("histogram counts do not match num_bins");
    auto total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0}) + underflow + overflow;
    if (total != num_fills) throw std::invalid_argument("histogram contents do not add up to num_fills");
    h.counts_ = std::move(counts);
    h.underflow_ = underflow;
    h.overflow_ = overflow;
    h.num_fills_ = num_fills;
    return h;
}

double Histogram::approx_mean() const {
    double sum = 0.0;
    std::int64_t n = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        sum += static_cast<double>(counts_[i]) * (spec_.lo + (static_cast<double>(i) + 0.5) * width_);
        n += counts_[i];
    }
    return n ? sum / static_cast<double>(n) : std::nan("");
}

Histogram merge(const Histogram &a, const Histogram &b) {
    Histogram out = a;
    out.merge(b);
    return out;
}

HistogramMap merge(const HistogramMap &a, const HistogramMap &b) {
    if (a.size() != b.size()) throw AggregationError("cannot merge histogram sets of different shape");
    HistogramMap out = a;
    for (const auto &[name, h] : b) {
        auto it = out.find(name);
        if (it == out.end()) throw AggregationError("histogram '" + name + "' missing from merge target");
        it->second.merge(h);
    }
    return out;
}

HistogramMap make_histograms(const std::vector<HistogramSpec> &specs) {
    HistogramMap out;
    for (const auto &s : specs)
        if (!out.emplace(s.name, Histogram(s)).second)
            throw std::invalid_argument("histogram '" + s.name + "' specified twice");
    return out;
}

std::string histograms_to_json(const HistogramMap &hists) {
    json arr = json::array();
    for (const auto &[name, h] : hists) {
        arr.push_back({{"name", name},
                       {"num_bins", h.spec().num_bins},
                       {"lo", h.spec().lo},
                       {"hi", h.spec().hi},
                       {"counts", std::vector<std::int64_t>(h.counts().begin(), h.counts().end())},
                       {"underflow", h.underflow()},
                       {"overflow", h.overflow()},
                       {"num_fills", h.num_fills()}});
    }
    return json{{"histograms", arr}}.dump(2);
}

HistogramMap histograms_from_json(std::string_view text) {
    try {
        auto j = json::parse(text);
        HistogramMap out;
        for (const auto &h : j.at("histograms")) {
            HistogramSpec spec{h.at("name").get<std::string>(), h.at("num_bins").get<int>(), h.at("lo").get<double>(),
                               h.at("hi").get<double>()};
            out.emplace(spec.name, Histogram::from_parts(spec, h.at("counts").get<std::vector<std::int64_t>>(),
                                                         h.at("underflow").get<std::int64_t>(),
                                                         h.at("overflow").get<std::int64_t>(),
                                                         h.at("num_fills").get<std::int64_t>()));
        }
        return out;
    } catch (const json::exception &e) {
        throw std::invalid_argument(std::string("bad histogram JSON: ") + e.what());
    }
}

std::string summarize(const HistogramMap &hists, bool sparkline) {
    static const char *kLevels[] = {" ", ".", ":", "-", "=", "+", "*", "#"};
    std::string out;
    for (const auto &[name, h] : hists) {
        char line[256];
        auto counts = h.counts();
        auto peak = std::max_element(counts.begin(), counts.end());
        auto bin = static_cast<std::size_t>(peak - counts.begin());
        double w = h.spec().bin_width();
        std::snprintf(line, sizeof line, "%s: fills=%lld mean=%.4g under=%lld over=%lld peak=%lld in [%g, %g)\n",
                      name.c_str(), static_cast<long long>(h.num_fills()), h.approx_mean(),
                      static_cast<long long>(h.underflow()), static_cast<long long>(h.overflow()),
                      static_cast<long long>(*peak), h.spec().lo + static_cast<double>(bin) * w,
                      h.spec().lo + static_cast<double>(bin + 1) * w);
        out += line;
        if (sparkline) {
            // Rebin to at most 60 columns.
            std::size_t cols = std::min<std::size_t>(60, counts.size());
            std::vector<std::int64_t> merged(cols, 0);
            for (std::size_t i = 0; i < counts.size(); ++i) merged[i * cols / counts.size()] += counts[i];
            auto top = *std::max_element(merged.begin(), merged.end());
            out += "  |";
            for (auto c : merged) out += kLevels[top ? (c * 7 + top - 1) / top : 0];
            out += "|\n";
        }
    }
    return out;
}

}  // namespace flatq::exec
