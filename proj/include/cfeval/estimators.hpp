#pragma once

#include <optional>
#include <vector>

#include "cfeval/common.hpp"
#include "cfeval/datagen.hpp"
#include "cfeval/nuisance.hpp"

namespace cfeval {

// Uncentered DR transform of Y0:
//   phi_i = (1 - t_i) / (1 - pi_i) * (y_i - s0_i) + s0_i.
// Treated rows collapse to s0_i exactly. Positivity is enforced per `policy`.
std::vector<double> pseudo_outcomes(const OracleDataset& dataset, const NuisanceSet& nuisances,
                                    double clip = 0.01,
                                    PositivityPolicy policy = PositivityPolicy::reject);

enum class MeanMethod { plugin, ipw, dr };

// Plug-in: mean of s0. IPW: mean of (1-t) y / (1-pi). DR: mean of phi.
// std_error is the sample standard deviation of the per-row terms / sqrt(n).
Estimate estimate_mean_y0(const OracleDataset& dataset, const NuisanceSet& nuisances,
                          MeanMethod method, double clip = 0.01,
                          PositivityPolicy policy = PositivityPolicy::reject);

// Ratio-of-means estimators with delta-method standard errors. For binary
// pseudo-outcomes these reduce exactly to the classical count ratios, so the
// same code path serves observational/control/oracle modes.
Estimate ratio_of_means(const std::vector<double>& numerator_terms,
                        const std::vector<double>& denominator_terms,
                        EstimatorKind kind, Metric metric);

// Mean of `values` over `rows` (all rows when empty via nullptr), sd/sqrt(n) error.
Estimate conditional_mean(const std::vector<double>& values, const std::vector<std::size_t>& rows,
                          EstimatorKind kind, Metric metric);

// DR counterfactual metrics against predicted labels (threshold already applied).
Estimate dr_tpr(const OracleDataset& dataset, const NuisanceSet& nuisances,
                const std::vector<std::uint8_t>& predicted_labels, double clip = 0.01,
                PositivityPolicy policy = PositivityPolicy::reject);
Estimate dr_fpr(const OracleDataset& dataset, const NuisanceSet& nuisances,
                const std::vector<std::uint8_t>& predicted_labels, double clip = 0.01,
                PositivityPolicy policy = PositivityPolicy::reject);
Estimate dr_precision(const OracleDataset& dataset, const NuisanceSet& nuisances,
                      const std::vector<std::uint8_t>& predicted_labels, double clip = 0.01,
                      PositivityPolicy policy = PositivityPolicy::reject);

// Mean of phi over rows with r1 <= score <= r2; empty bin is a missing value.
std::optional<Estimate> dr_calibration_bin(const OracleDataset& dataset,
                                           const NuisanceSet& nuisances,
                                           const std::vector<double>& scores, double r1, double r2,
                                           double clip = 0.01,
                                           PositivityPolicy policy = PositivityPolicy::reject);

enum class EvalMode { observational, control, dr, oracle };

std::string to_string(EvalMode mode);
EvalMode eval_mode_from_string(const std::string& name);

// Pseudo-outcome vector and row subset realizing a mode:
//   observational: phi = y, all rows      control: phi = y, t = 0 rows
//   dr:            phi = DR transform     oracle: phi = y0, all rows
struct ModeContext {
    std::vector<double> phi;        // aligned to `rows`
    std::vector<std::size_t> rows;  // dataset row indices
    EstimatorKind kind;
};

ModeContext mode_context(EvalMode mode, const OracleDataset& dataset,
                         const NuisanceSet* nuisances, double clip = 0.01,
                         PositivityPolicy policy = PositivityPolicy::reject);

Estimate mode_base_rate(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
                        double clip = 0.01, PositivityPolicy policy = PositivityPolicy::reject);
Estimate mode_tpr(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
                  const std::vector<std::uint8_t>& predicted_labels, double clip = 0.01,
                  PositivityPolicy policy = PositivityPolicy::reject);
Estimate mode_fpr(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
                  const std::vector<std::uint8_t>& predicted_labels, double clip = 0.01,
                  PositivityPolicy policy = PositivityPolicy::reject);
std::optional<Estimate> mode_precision(EvalMode mode, const OracleDataset& dataset,
                                       const NuisanceSet* nuisances,
                                       const std::vector<std::uint8_t>& predicted_labels,
                                       double clip = 0.01,
                                       PositivityPolicy policy = PositivityPolicy::reject);
std::optional<Estimate> mode_calibration_bin(EvalMode mode, const OracleDataset& dataset,
                                             const NuisanceSet* nuisances,
                                             const std::vector<double>& scores, double r1,
                                             double r2, double clip = 0.01,
                                             PositivityPolicy policy = PositivityPolicy::reject);

// Generalized rates: scores stand in for predicted labels.
//   GFNR = E[1 - s | outcome = 1], GFPR = E[s | outcome = 0] under the mode.
Estimate mode_gfnr(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
                   const std::vector<double>& scores, double clip = 0.01,
                   PositivityPolicy policy = PositivityPolicy::reject);
Estimate mode_gfpr(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
                   const std::vector<double>& scores, double clip = 0.01,
                   PositivityPolicy policy = PositivityPolicy::reject);

} // namespace cfeval
