#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cfeval/datagen.hpp"
#include "cfeval/glm.hpp"

namespace cfeval {

enum class PositivityPolicy { reject, winsorize };

// Aligned per-row nuisance scores. Values are stored as produced; the positivity
// bound is enforced where the scores are consumed (pseudo_outcomes) or eagerly
// via enforce_positivity.
struct NuisanceSet {
    std::vector<double> propensity;
    std::vector<double> cf_scores;
    std::optional<std::vector<double>> obs_scores;
    std::string provenance;
};

// Logistic model for E[Y|X] on all rows; with include_treatment, E[Y|X,T]
// (the Appendix-style treatment-as-feature variant, never a default).
ScoreModel fit_observational(const OracleDataset& train, bool include_treatment = false,
                             const FitConfig& config = {});

// Logistic model for P(T=1|X) on all rows.
ScoreModel fit_propensity(const OracleDataset& train, const FitConfig& config = {});

// Logistic model for E[Y|X,T=0] on control rows. With shift_correction, control
// rows are weighted by 1/(1 - pi_hat) from a pre-fit propensity model so the
// weighted control sample targets the full-population covariate law.
ScoreModel fit_counterfactual(const OracleDataset& train, bool shift_correction = false,
                              const FitConfig& config = {}, double clip = 0.01);

struct NuisanceModels {
    ScoreModel propensity;
    ScoreModel counterfactual;
    std::optional<ScoreModel> observational;
};

NuisanceModels fit_nuisance_models(const OracleDataset& train, const FitConfig& config = {},
                                   bool with_observational = true,
                                   bool obs_include_treatment = false,
                                   bool shift_correction = false);

// Scores every row of `dataset` (treated rows included) with the fitted models.
NuisanceSet attach_scores(const OracleDataset& dataset, const NuisanceModels& models);

// Analytic generator probabilities as a NuisanceSet (for double-robustness tests).
NuisanceSet oracle_nuisances(const OracleDataset& dataset);

// reject: throws PositivityError naming rows with propensity > 1 - clip.
// winsorize: truncates them at 1 - clip.
void enforce_positivity(std::vector<double>& propensity, double clip, PositivityPolicy policy);

NuisanceSet subset(const NuisanceSet& nuisances, const std::vector<std::size_t>& rows);

} // namespace cfeval
