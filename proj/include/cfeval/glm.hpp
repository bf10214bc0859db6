#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cfeval/common.hpp"
#include "cfeval/datagen.hpp"

namespace cfeval {

struct FitConfig {
    int max_iterations = 100;
    double gradient_tolerance = 1e-8; // max-norm of the (weighted) score equations
    double l2_penalty = 0.0;          // never applied to the intercept
};

struct ScoreModel {
    std::vector<std::string> feature_spec;
    Eigen::VectorXd coefficients; // aligned to feature_spec
    double intercept = 0.0;
    int iterations = 0;
    double gradient_norm = 0.0;

    double score(const Eigen::Ref<const Eigen::RowVectorXd>& features) const;
    std::vector<double> score_rows(const Eigen::Ref<const Eigen::MatrixXd>& features) const;
    std::string to_json() const;
    static ScoreModel from_json(const std::string& text);
};

// Weighted logistic regression by iteratively reweighted least squares.
// `weights` may be empty (unit weights). Throws DataError when a label class is
// missing (with positive weight), SeparationError when the unpenalized
// likelihood diverges, FitError on non-convergence.
ScoreModel fit_logistic(const Eigen::MatrixXd& features,
                        const std::vector<std::uint8_t>& labels,
                        const std::vector<double>& weights = {},
                        const FitConfig& config = {},
                        std::vector<std::string> feature_spec = {});

// Label 1 iff score >= threshold (threshold 0 is the all-positive classifier).
std::vector<std::uint8_t> threshold_labels(const std::vector<double>& scores, double threshold);

// Design matrices over dataset columns; feature order is (z[, a][, t]).
Eigen::MatrixXd design_matrix(const OracleDataset& dataset, bool include_a, bool include_t);
std::vector<std::string> design_spec(bool include_a, bool include_t);

} // namespace cfeval
