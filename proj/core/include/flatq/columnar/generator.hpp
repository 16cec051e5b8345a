#pragma once

#include "flatq/columnar/dataset.hpp"

#include <cstdint>
#include <numbers>

namespace flatq::columnar {

/// Distribution parameters of the synthetic muon generator.
struct GeneratorParams {
    double mean_multiplicity = 2.5;  // Poisson mean, resampled above max
    int max_multiplicity = 16;
    double pt_mean = 30.0;           // exponential part of pt
    double pt_offset = 3.0;
    double eta_max = 2.5;            // eta uniform in [-eta_max, eta_max)
    double phi_max = std::numbers::pi;

    friend bool operator==(const GeneratorParams &, const GeneratorParams &) = default;
};

/// Events under event_schema(); a pure function of (n, seed, params).
ColumnarDataset generate_events(std::int64_t n, std::uint64_t seed, const GeneratorParams &params = {});

}  // namespace flatq::columnar
