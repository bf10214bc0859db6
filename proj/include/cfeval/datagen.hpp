#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cfeval/common.hpp"

namespace cfeval {

struct GeneratorParams {
    std::size_t n = 100000;
    double c = 0.1;      // treatment-effect multiplier in [0,1]
    double k = 1.6;      // treatment-assignment bias (>= 0)
    double offset = -0.5;
    std::uint64_t seed = 1;
};

void validate(const GeneratorParams& params);

// Synthetic population carrying both potential outcomes.
struct OracleDataset {
    std::vector<double> z;
    std::vector<std::uint8_t> a;
    std::vector<std::uint8_t> y0;
    std::vector<std::uint8_t> y1;
    std::vector<std::uint8_t> t;
    std::vector<std::uint8_t> y;
    GeneratorParams params;

    std::size_t size() const { return z.size(); }
};

struct MomentSummary {
    double mean_y = 0;
    double mean_y0 = 0;
    double mean_y1 = 0;
    double mean_t = 0;
    std::optional<double> mean_t_given_a0;
    std::optional<double> mean_t_given_a1;
};

double sigmoid(double x);

// Generation law, per row in draw order (Z, A, Y0, Y1, T):
//   Z ~ N(0,1); A ~ Bern(0.5); Y0 ~ Bern(sigmoid(Z + offset));
//   Y1 ~ Bern(c * sigmoid(Z + offset)); T ~ Bern(sigmoid(Z + offset + k*A));
//   Y = T*Y1 + (1-T)*Y0.
// Rows are produced in fixed-size blocks, each from its own seed substream, so
// the output is independent of any future parallelization and prefixes agree
// across different n.
OracleDataset generate(const GeneratorParams& params);

MomentSummary summarize(const OracleDataset& dataset);

// Analytic generator probabilities (oracle nuisances for robustness tests).
double true_s0(double z, const GeneratorParams& params);
double true_s1(double z, const GeneratorParams& params);
double true_propensity(double z, double a, const GeneratorParams& params);

OracleDataset subset(const OracleDataset& dataset, const std::vector<std::size_t>& rows);

template <typename T>
std::vector<T> take(const std::vector<T>& values, const std::vector<std::size_t>& rows) {
    std::vector<T> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(values[r]);
    return out;
}

} // namespace cfeval
