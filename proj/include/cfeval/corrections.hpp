#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cfeval/datagen.hpp"
#include "cfeval/rng.hpp"

namespace cfeval {

// Kamiran-Calders reweighing: w(a, y) = P(A=a) P(Y=y) / P(A=a, Y=y).
struct ReweighPlan {
    std::array<std::array<double, 2>, 2> w{}; // [a][y]
    double weight(int a, int y) const { return w[a][y]; }
    std::vector<double> row_weights(const OracleDataset& dataset) const;
};

ReweighPlan kamiran_weights(const OracleDataset& dataset);

struct ReweighPoint {
    double k = 0;
    double obs_disparity_before = 0;
    double obs_disparity_after = 0;
    double cf_disparity_before = 0;
    double cf_disparity_after = 0;
    double obs_after_std_error = 0;
    double cf_after_std_error = 0;
};

// Observed and counterfactual (oracle y0) base-rate disparities per k, before
// and after reweighing; standard errors by seeded bootstrap.
std::vector<ReweighPoint> reweigh_experiment(const std::vector<double>& k_grid, double c,
                                             std::size_t n, std::uint64_t seed,
                                             int bootstrap = 200);

struct MixingPolicy {
    std::array<double, 2> lambda{}; // per-group mixing rate, index = a
    std::array<double, 2> mu{};     // per-group trivial prediction (observed base rate)
    double objective = 0;           // achieved (delta oGFNR)^2 + (delta oGFPR)^2
    std::size_t grid_evaluations = 0;
};

// Expected generalized rates of the lambda-mixture toward the trivial predictor:
//   gfnr(lambda) = (1-lambda) gfnr + lambda (1-mu)
//   gfpr(lambda) = (1-lambda) gfpr + lambda mu
struct RatePair {
    double gfnr = 0;
    double gfpr = 0;
};
RatePair expected_mixed_rates(const RatePair& original, double mu, double lambda);

// Grid search (given step) over (lambda_0, lambda_1) minimizing the squared
// disparity of the expected observational generalized rates, ties broken toward
// smaller lambda_0 + lambda_1.
MixingPolicy search_mixing_policy(const std::vector<double>& scores,
                                  const std::vector<std::uint8_t>& y,
                                  const std::vector<std::uint8_t>& a, double step = 0.01);

// Randomized application: each unit of group g keeps its score except with
// probability lambda_g, when the score becomes mu_g. mixed_flags (optional)
// records which rows were replaced.
std::vector<double> apply_mixing(const std::vector<double>& scores,
                                 const std::vector<std::uint8_t>& a, const MixingPolicy& policy,
                                 Rng& rng, std::vector<std::uint8_t>* mixed_flags = nullptr);

struct PostprocessResult {
    std::vector<double> adjusted_scores;
    std::vector<std::uint8_t> mixed;
    MixingPolicy policy;
};

// Pleiss-style generalized equalized odds via trivial-predictor mixing. The
// policy is fit on (scores, y, a) of the calibration data and applied to the
// same rows; reuse search_mixing_policy + apply_mixing to carry a policy onto
// other data.
PostprocessResult postprocess_equalized_odds(const OracleDataset& calibration,
                                             const std::vector<double>& scores,
                                             std::uint64_t seed);

} // namespace cfeval
