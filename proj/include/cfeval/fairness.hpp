#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cfeval/estimators.hpp"

namespace cfeval {

struct ModeEstimates {
    std::optional<Estimate> observational;
    std::optional<Estimate> control;
    std::optional<Estimate> dr;
    std::optional<Estimate> oracle;
};

struct GroupMetrics {
    int group = 0;
    std::size_t n_rows = 0;
    Estimate base_rate_obs;
    Estimate base_rate_cf; // via dr mode
    ModeEstimates tpr;
    ModeEstimates fpr;
    ModeEstimates precision;
    Estimate gfnr_obs;
    Estimate gfpr_obs;
    Estimate gfnr_cf;
    Estimate gfpr_cf;
};

// Per-group metric table. Counterfactual entries use the dr mode; oracle-mode
// entries are filled when with_oracle is set (synthetic data).
std::vector<GroupMetrics> group_metrics(const OracleDataset& dataset,
                                        const NuisanceSet& nuisances,
                                        const std::vector<double>& scores,
                                        const std::vector<std::uint8_t>& predicted_labels,
                                        bool with_oracle = true, double clip = 0.01,
                                        PositivityPolicy policy = PositivityPolicy::winsorize);

// value(group 1) - value(group 0) of a named field; missing entries propagate.
std::optional<double> disparity(const std::vector<GroupMetrics>& metrics,
                                const std::string& metric_name);

enum class BalanceCondition { balBP, balPP, balEO };

std::string to_string(BalanceCondition condition);

struct BalanceResidual {
    BalanceCondition condition = BalanceCondition::balBP;
    int y = 1;
    int group = 1;
    std::optional<int> yhat; // balPP stratum
    double lhs = 0;
    double rhs = 0;
    double residual = 0;
    double std_error = 0; // seeded bootstrap
    bool estimable = true;
    std::string note;
};

// Empirical balance conditions of the three theorems, evaluated on oracle data.
BalanceResidual balance_bp(const OracleDataset& dataset, int group, int y,
                           int bootstrap = 200, std::uint64_t seed = 1);
BalanceResidual balance_pp(const OracleDataset& dataset,
                           const std::vector<std::uint8_t>& predicted_labels, int group, int y,
                           int yhat, int bootstrap = 200, std::uint64_t seed = 1);
BalanceResidual balance_eo(const OracleDataset& dataset,
                           const std::vector<std::uint8_t>& predicted_labels, int group, int y,
                           int bootstrap = 200, std::uint64_t seed = 1);

struct IndependenceCell {
    std::string stratum;  // e.g. "y0=1"
    std::string cell;     // e.g. "t=1,a=1"
    double deviation = 0; // P(cell | stratum, a) - P(cell | stratum)
    double std_error = 0;
    bool estimable = true;
    bool flagged = false; // |deviation| > 3 std_error
};

struct IndependenceCondition {
    std::string name; // e.g. "T _||_ A | Y0"
    std::string family; // indBP | indPP | indEO
    double max_abs_deviation = 0;
    double max_dev_std_error = 0;
    bool pass = true; // no cell flagged
    std::vector<IndependenceCell> cells;
};

struct IndependenceReport {
    std::vector<IndependenceCondition> conditions;
};

// Evaluates the indBP/indPP/indEO independences on oracle data: per condition,
// the deviation of each conditional cell probability from its a-marginal
// counterpart, with bootstrap standard errors. A condition fails when any cell
// deviates by more than 3 standard errors.
IndependenceReport independence_report(const OracleDataset& dataset,
                                       const std::vector<std::uint8_t>& predicted_labels,
                                       int bootstrap = 200, std::uint64_t seed = 1);

} // namespace cfeval
