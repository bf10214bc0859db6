#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cfeval/estimators.hpp"

namespace cfeval {

struct CurvePoint {
    double param = 0;  // threshold (pr/roc) or bin midpoint (calibration)
    double x = 0;
    double y = 0;
    std::optional<double> ci_low;
    std::optional<double> ci_high;
};

struct Curve {
    std::string model;
    EvalMode mode = EvalMode::dr;
    std::string kind; // "pr" | "roc" | "calibration"
    std::vector<CurvePoint> points;
    std::size_t omitted = 0; // undefined points (no positives, empty bins)
};

std::vector<double> threshold_grid(std::size_t count = 101);

// PR: x = TPR (recall), y = precision; points with no predicted positives are
// omitted. ROC: x = FPR, y = TPR. Calibration: x = bin midpoint, y = mode
// outcome mean with the normal-approximation CI; empty bins omitted.
Curve pr_curve(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
               const std::vector<double>& scores, const std::vector<double>& thresholds,
               const std::string& model_name, double clip = 0.01,
               PositivityPolicy policy = PositivityPolicy::reject);
Curve roc_curve(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
                const std::vector<double>& scores, const std::vector<double>& thresholds,
                const std::string& model_name, double clip = 0.01,
                PositivityPolicy policy = PositivityPolicy::reject);
Curve calibration_curve(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
                        const std::vector<double>& scores, int n_bins,
                        const std::string& model_name, double clip = 0.01,
                        PositivityPolicy policy = PositivityPolicy::reject);

// Trapezoidal area over points sorted by x.
double area_under_pr(const Curve& curve);
double area_under_roc(const Curve& curve);

// Max |y_a - y_b| over parameters present in both curves (calibration bins).
double max_pointwise_gap(const Curve& a, const Curve& b);

} // namespace cfeval
