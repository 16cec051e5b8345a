#include "flatq/columnar/generator.hpp"

#include <random>

namespace flatq::columnar {

ColumnarDataset generate_events(std::int64_t n, std::uint64_t seed, const GeneratorParams &params) {
    if (n < 0) throw std::invalid_argument("event count must be non-negative");

    std::mt19937_64 rng(seed);
    std::poisson_distribution<int> multiplicity(params.mean_multiplicity);
    std::exponential_distribution<double> pt(1.0 / params.pt_mean);
    std::uniform_real_distribution<double> eta(-params.eta_max, params.eta_max);
    std::uniform_real_distribution<double> phi(-params.phi_max, params.phi_max);

    std::vector<std::int64_t> offsets;
    offsets.reserve(static_cast<std::size_t>(n) + 1);
    offsets.push_back(0);
    std::vector<double> pts, etas, phis;
    const auto expected = static_cast<std::size_t>(static_cast<double>(n) * params.mean_multiplicity * 1.05);
    pts.reserve(expected);
    etas.reserve(expected);
    phis.reserve(expected);

    for (std::int64_t i = 0; i < n; ++i) {
        int count;
        do {
            count = multiplicity(rng);
        } while (count > params.max_multiplicity);
        for (int m = 0; m < count; ++m) {
            pts.push_back(pt(rng) + params.pt_offset);
            etas.push_back(eta(rng));
            phis.push_back(phi(rng));
        }
        offsets.push_back(offsets.back() + count);
    }

    std::map<std::string, std::vector<std::int64_t>> off;
    off.emplace("muons", std::move(offsets));
    std::map<std::string, Column> attrs;
    attrs.emplace("muons.pt", std::move(pts));
    attrs.emplace("muons.eta", std::move(etas));
    attrs.emplace("muons.phi", std::move(phis));
    return ColumnarDataset(event_schema(), n, std::move(off), std::move(attrs));
}

}  // namespace flatq::columnar
