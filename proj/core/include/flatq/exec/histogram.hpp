#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace flatq::exec {

struct HistogramSpec {
    std::string name;
    int num_bins = 1;
    double lo = 0.0;
    double hi = 1.0;

    /// Throws std::invalid_argument unless num_bins >= 1, lo < hi, both finite.
    void validate() const;
    double bin_width() const { return (hi - lo) / num_bins; }

    /// `name:bins:lo:hi`
    static HistogramSpec parse(std::string_view text);
    std::string to_string() const;

    friend bool operator==(const HistogramSpec &, const HistogramSpec &) = default;
};

struct AggregationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Histogram {
public:
    explicit Histogram(HistogramSpec spec);

    void fill(double v) {
        ++num_fills_;
        if (v < spec_.lo) {
            ++underflow_;
        } else if (!(v < spec_.hi)) {  // also NaN
            ++overflow_;
        } else {
            auto bin = static_cast<std::int64_t>((v - spec_.lo) / width_);
            if (bin >= spec_.num_bins) bin = spec_.num_bins - 1;
            ++counts_[static_cast<std::size_t>(bin)];
        }
    }

    /// Adds `other` bin-wise. Throws AggregationError on a spec mismatch.
    void merge(const Histogram &other);

    const HistogramSpec &spec() const { return spec_; }
    std::span<const std::int64_t> counts() const { return counts_; }
    std::int64_t underflow() const { return underflow_; }
    std::int64_t overflow() const { return overflow_; }
    std::int64_t num_fills() const { return num_fills_; }

    /// Builds a histogram from stored contents; checks the fill conservation rule.
    static Histogram from_parts(HistogramSpec spec, std::vector<std::int64_t> counts, std::int64_t underflow,
                                std::int64_t overflow, std::int64_t num_fills);

    /// Mean of in-range fills using bin centres; NaN when there are none.
    double approx_mean() const;

    friend bool operator==(const Histogram &, const Histogram &) = default;

private:
    HistogramSpec spec_;
    double width_;
    std::vector<std::int64_t> counts_;
    std::int64_t underflow_ = 0;
    std::int64_t overflow_ = 0;
    std::int64_t num_fills_ = 0;
};

using HistogramMap = std::map<std::string, Histogram>;

Histogram merge(const Histogram &a, const Histogram &b);
/// Key-wise merge; both maps must hold the same names and specs.
HistogramMap merge(const HistogramMap &a, const HistogramMap &b);

/// Empty histograms for the given specs. Throws std::invalid_argument on duplicate names.
HistogramMap make_histograms(const std::vector<HistogramSpec> &specs);

/// `{"histograms": [...]}` sorted by name.
std::string histograms_to_json(const HistogramMap &hists);
HistogramMap histograms_from_json(std::string_view text);

/// Multi-line text: fills, mean, fullest bin and an ASCII sparkline per histogram.
std::string summarize(const HistogramMap &hists, bool sparkline = true);

}  // namespace flatq::exec
