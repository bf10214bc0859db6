#include "cfeval/glm.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace cfeval {

namespace {

constexpr double kSeparationCoefBound = 30.0;

// Weighted negative log-likelihood plus ridge term (intercept unpenalized).
double objective(const Eigen::MatrixXd& design, const Eigen::VectorXd& labels,
                 const Eigen::VectorXd& weights, const Eigen::VectorXd& beta, double penalty) {
    Eigen::VectorXd eta = design * beta;
    double nll = 0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        // log(1 + exp(eta)) - y*eta, computed stably.
        double e = eta[i];
        double log1pexp = e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e));
        nll += weights[i] * (log1pexp - labels[i] * e);
    }
    double ridge = 0;
    for (Eigen::Index j = 1; j < beta.size(); ++j) ridge += beta[j] * beta[j];
    return nll + 0.5 * penalty * ridge;
}

} // namespace

ScoreModel fit_logistic(const Eigen::MatrixXd& features, const std::vector<std::uint8_t>& labels,
                        const std::vector<double>& weights, const FitConfig& config,
                        std::vector<std::string> feature_spec) {
    const Eigen::Index n = features.rows();
    const Eigen::Index p = features.cols();
    if (static_cast<std::size_t>(n) != labels.size())
        throw AlignmentError("feature rows and labels differ in length");
    if (!weights.empty() && weights.size() != labels.size())
        throw AlignmentError("weights and labels differ in length");
    if (config.gradient_tolerance <= 0) throw ParameterError("gradient_tolerance must be > 0");
    if (config.l2_penalty < 0) throw ParameterError("l2_penalty must be >= 0");
    if (!feature_spec.empty() && static_cast<Eigen::Index>(feature_spec.size()) != p)
        throw AlignmentError("feature_spec length does not match feature columns");
    if (feature_spec.empty()) {
        for (Eigen::Index j = 0; j < p; ++j) feature_spec.push_back("x" + std::to_string(j));
    }

    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double wi = weights.empty() ? 1.0 : weights[i];
        if (wi < 0) throw ParameterError("weights must be nonnegative");
        w[i] = wi;
    }
    Eigen::VectorXd yv(n);
    double pos_weight = 0, neg_weight = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        yv[i] = labels[i] ? 1.0 : 0.0;
        (labels[i] ? pos_weight : neg_weight) += w[i];
    }
    if (pos_weight <= 0 || neg_weight <= 0)
        throw DataError("labels are degenerate (one class has zero weight)");

    Eigen::MatrixXd design(n, p + 1);
    design.col(0).setOnes();
    design.rightCols(p) = features;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
    Eigen::VectorXd penalty_diag = Eigen::VectorXd::Constant(p + 1, config.l2_penalty);
    penalty_diag[0] = 0.0;

    double current_objective = objective(design, yv, w, beta, config.l2_penalty);
    double grad_norm = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;

    for (; iterations < config.max_iterations; ++iterations) {
        Eigen::VectorXd eta = design * beta;
        Eigen::VectorXd prob = eta.unaryExpr([](double v) { return sigmoid(v); });
        Eigen::VectorXd grad = design.transpose() * (w.array() * (yv - prob).array()).matrix();
        for (Eigen::Index j = 1; j <= p; ++j) grad[j] -= config.l2_penalty * beta[j];
        grad_norm = grad.lpNorm<Eigen::Infinity>();
        if (grad_norm <= config.gradient_tolerance) {
            converged = true;
            break;
        }

        Eigen::VectorXd irls = (w.array() * prob.array() * (1.0 - prob.array())).matrix();
        Eigen::MatrixXd hessian = design.transpose() * irls.asDiagonal() * design;
        hessian.diagonal() += penalty_diag;
        Eigen::LDLT<Eigen::MatrixXd> solver(hessian);
        Eigen::VectorXd step = solver.solve(grad);
        if (solver.info() != Eigen::Success || !step.allFinite()) {
            if (config.l2_penalty == 0)
                throw SeparationError(
                    "logistic fit diverged (singular step) — data are likely completely "
                    "separated; set l2_penalty > 0");
            throw FitError("logistic fit produced a non-finite Newton step", grad_norm);
        }

        // Backtrack if the full Newton step overshoots. The acceptance slack is
        // relative to the objective scale; near the optimum the true improvement
        // drops below the objective's floating-point resolution.
        double slack = 1e-12 * (1.0 + std::abs(current_objective));
        double scale = 1.0;
        Eigen::VectorXd candidate = beta + step;
        double candidate_objective = objective(design, yv, w, candidate, config.l2_penalty);
        for (int halving = 0; halving < 30 && !(candidate_objective <= current_objective + slack);
             ++halving) {
            scale *= 0.5;
            candidate = beta + scale * step;
            candidate_objective = objective(design, yv, w, candidate, config.l2_penalty);
        }
        beta = candidate;
        current_objective = candidate_objective;

        if (config.l2_penalty == 0 &&
            (!beta.allFinite() || beta.lpNorm<Eigen::Infinity>() > kSeparationCoefBound)) {
            throw SeparationError(
                "logistic coefficients diverged beyond |beta| = 30 with zero penalty — data are "
                "likely completely separated; set l2_penalty > 0");
        }
    }

    if (!converged) {
        Eigen::VectorXd eta = design * beta;
        Eigen::VectorXd prob = eta.unaryExpr([](double v) { return sigmoid(v); });
        Eigen::VectorXd grad = design.transpose() * (w.array() * (yv - prob).array()).matrix();
        for (Eigen::Index j = 1; j <= p; ++j) grad[j] -= config.l2_penalty * beta[j];
        grad_norm = grad.lpNorm<Eigen::Infinity>();
        if (grad_norm > config.gradient_tolerance)
            throw FitError("logistic fit did not reach gradient tolerance " +
                               std::to_string(config.gradient_tolerance) + " within " +
                               std::to_string(config.max_iterations) +
                               " iterations (last gradient max-norm " +
                               std::to_string(grad_norm) + ")",
                           grad_norm);
    }

    if (config.l2_penalty == 0) {
        // A saturated perfect fit means the likelihood supremum is at infinity:
        // the gradient only fell below tolerance because every residual vanished.
        Eigen::VectorXd prob = (design * beta).unaryExpr([](double v) { return sigmoid(v); });
        bool saturated = true;
        for (Eigen::Index i = 0; i < n && saturated; ++i) {
            if (w[i] <= 0) continue;
            double hit = labels[static_cast<std::size_t>(i)] ? prob[i] : 1.0 - prob[i];
            if (hit < 1.0 - 1e-4) saturated = false;
        }
        if (saturated)
            throw SeparationError(
                "data are completely separated; the unpenalized likelihood has no maximizer — "
                "set l2_penalty > 0");
    }

    ScoreModel model;
    model.feature_spec = std::move(feature_spec);
    model.intercept = beta[0];
    model.coefficients = beta.tail(p);
    model.iterations = iterations;
    model.gradient_norm = grad_norm;
    return model;
}

double ScoreModel::score(const Eigen::Ref<const Eigen::RowVectorXd>& features) const {
    if (features.size() != coefficients.size())
        throw AlignmentError("feature vector length does not match model feature_spec");
    return sigmoid(intercept + features.dot(coefficients.transpose()));
}

std::vector<double> ScoreModel::score_rows(
    const Eigen::Ref<const Eigen::MatrixXd>& features) const {
    if (features.cols() != coefficients.size())
        throw AlignmentError("feature columns do not match model feature_spec");
    Eigen::VectorXd eta = (features * coefficients).array() + intercept;
    std::vector<double> out(static_cast<std::size_t>(eta.size()));
    for (Eigen::Index i = 0; i < eta.size(); ++i) out[i] = sigmoid(eta[i]);
    return out;
}

std::string ScoreModel::to_json() const {
    nlohmann::json j;
    j["feature_spec"] = feature_spec;
    j["coefficients"] = std::vector<double>(coefficients.data(),
                                            coefficients.data() + coefficients.size());
    j["intercept"] = intercept;
    j["iterations"] = iterations;
    j["gradient_norm"] = gradient_norm;
    return j.dump(2);
}

ScoreModel ScoreModel::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ScoreModel model;
    model.feature_spec = j.at("feature_spec").get<std::vector<std::string>>();
    auto coefs = j.at("coefficients").get<std::vector<double>>();
    model.coefficients = Eigen::Map<Eigen::VectorXd>(coefs.data(),
                                                     static_cast<Eigen::Index>(coefs.size()));
    model.intercept = j.at("intercept").get<double>();
    model.iterations = j.value("iterations", 0);
    model.gradient_norm = j.value("gradient_norm", 0.0);
    if (model.feature_spec.size() != static_cast<std::size_t>(model.coefficients.size()))
        throw DataError("model JSON: feature_spec and coefficients lengths differ");
    return model;
}

std::vector<std::uint8_t> threshold_labels(const std::vector<double>& scores, double threshold) {
    std::vector<std::uint8_t> labels(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) labels[i] = scores[i] >= threshold ? 1 : 0;
    return labels;
}

Eigen::MatrixXd design_matrix(const OracleDataset& dataset, bool include_a, bool include_t) {
    Eigen::Index n = static_cast<Eigen::Index>(dataset.size());
    Eigen::Index cols = 1 + (include_a ? 1 : 0) + (include_t ? 1 : 0);
    Eigen::MatrixXd X(n, cols);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index col = 0;
        X(i, col++) = dataset.z[static_cast<std::size_t>(i)];
        if (include_a) X(i, col++) = dataset.a[static_cast<std::size_t>(i)];
        if (include_t) X(i, col++) = dataset.t[static_cast<std::size_t>(i)];
    }
    return X;
}

std::vector<std::string> design_spec(bool include_a, bool include_t) {
    std::vector<std::string> spec{"z"};
    if (include_a) spec.push_back("a");
    if (include_t) spec.push_back("t");
    return spec;
}

} // namespace cfeval
