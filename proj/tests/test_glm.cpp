#include <cmath>

#include <doctest.h>

#include "cfeval/glm.hpp"
#include "cfeval/rng.hpp"

using namespace cfeval;

namespace {

// Logistic draws from a known coefficient vector.
struct Synthetic {
    Eigen::MatrixXd x;
    std::vector<std::uint8_t> y;
};

Synthetic make_logistic(std::size_t n, double intercept, double slope, std::uint64_t seed) {
    Rng rng(seed);
    Synthetic out;
    out.x.resize(n, 1);
    out.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double z = rng.normal();
        out.x(static_cast<Eigen::Index>(i), 0) = z;
        out.y[i] = rng.bernoulli(sigmoid(intercept + slope * z)) ? 1 : 0;
    }
    return out;
}

} // namespace

TEST_SUITE("glm") {

TEST_CASE("recovers known coefficients") {
    Synthetic data = make_logistic(50000, -0.5, 1.0, 3);
    ScoreModel model = fit_logistic(data.x, data.y);
    CHECK(std::abs(model.intercept - (-0.5)) < 0.05);
    CHECK(std::abs(model.coefficients(0) - 1.0) < 0.05);
    CHECK(model.gradient_norm <= 1e-8);
}

TEST_CASE("weight 2 equals a duplicated row") {
    Synthetic data = make_logistic(200, 0.2, 0.8, 5);
    std::vector<double> weights(200, 1.0);
    weights[13] = 2.0;

    Eigen::MatrixXd xdup(201, 1);
    xdup.topRows(200) = data.x;
    xdup(200, 0) = data.x(13, 0);
    std::vector<std::uint8_t> ydup = data.y;
    ydup.push_back(data.y[13]);

    ScoreModel weighted = fit_logistic(data.x, data.y, weights);
    ScoreModel duplicated = fit_logistic(xdup, ydup);
    CHECK(std::abs(weighted.intercept - duplicated.intercept) < 1e-7);
    CHECK(std::abs(weighted.coefficients(0) - duplicated.coefficients(0)) < 1e-7);
}

TEST_CASE("missing label class throws") {
    Eigen::MatrixXd x(4, 1);
    x << -1, 0, 1, 2;
    std::vector<std::uint8_t> y = {1, 1, 1, 1};
    CHECK_THROWS_AS(fit_logistic(x, y), DataError);

    // A class that exists only with zero weight is still missing.
    std::vector<std::uint8_t> y2 = {0, 1, 1, 1};
    std::vector<double> w = {0.0, 1.0, 1.0, 1.0};
    CHECK_THROWS_AS(fit_logistic(x, y2, w), DataError);
}

TEST_CASE("complete separation throws") {
    Eigen::MatrixXd x(6, 1);
    x << -3, -2, -1, 1, 2, 3;
    std::vector<std::uint8_t> y = {0, 0, 0, 1, 1, 1};
    CHECK_THROWS_AS(fit_logistic(x, y), SeparationError);
}

TEST_CASE("ridge penalty shrinks the slope but not the intercept") {
    Synthetic data = make_logistic(5000, 0.4, 1.0, 9);
    FitConfig heavy;
    heavy.l2_penalty = 1e6;
    ScoreModel shrunk = fit_logistic(data.x, data.y, {}, heavy);
    CHECK(std::abs(shrunk.coefficients(0)) < 2e-3);
    double base = 0;
    for (std::uint8_t v : data.y) base += v;
    base /= static_cast<double>(data.y.size());
    double logit = std::log(base / (1 - base));
    CHECK(std::abs(shrunk.intercept - logit) < 1e-3);
}

TEST_CASE("separation is tamed by a penalty") {
    Eigen::MatrixXd x(6, 1);
    x << -3, -2, -1, 1, 2, 3;
    std::vector<std::uint8_t> y = {0, 0, 0, 1, 1, 1};
    FitConfig config;
    config.l2_penalty = 0.1;
    ScoreModel model = fit_logistic(x, y, {}, config);
    CHECK(std::isfinite(model.coefficients(0)));
}

TEST_CASE("score and score_rows agree and stay in (0,1)") {
    Synthetic data = make_logistic(100, 0.0, 1.0, 11);
    ScoreModel model = fit_logistic(data.x, data.y);
    std::vector<double> scores = model.score_rows(data.x);
    REQUIRE(scores.size() == 100);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        CHECK(scores[i] > 0.0);
        CHECK(scores[i] < 1.0);
        CHECK(scores[i] == model.score(data.x.row(static_cast<Eigen::Index>(i))));
    }
}

TEST_CASE("json round trip preserves the model exactly") {
    Synthetic data = make_logistic(500, -0.2, 0.7, 13);
    ScoreModel model = fit_logistic(data.x, data.y, {}, {}, {"z"});
    ScoreModel back = ScoreModel::from_json(model.to_json());
    CHECK(back.intercept == model.intercept);
    CHECK(back.coefficients(0) == model.coefficients(0));
    CHECK(back.feature_spec == model.feature_spec);
}

TEST_CASE("threshold_labels uses the >= rule") {
    std::vector<double> scores = {0.1, 0.5, 0.7};
    std::vector<std::uint8_t> labels = threshold_labels(scores, 0.5);
    CHECK(labels == std::vector<std::uint8_t>{0, 1, 1});
    CHECK(threshold_labels(scores, 0.0) == std::vector<std::uint8_t>{1, 1, 1});
    CHECK(threshold_labels(scores, 0.8) == std::vector<std::uint8_t>{0, 0, 0});
}

TEST_CASE("design matrix column layout is (z, a, t)") {
    OracleDataset d;
    d.z = {0.5, -1.0};
    d.a = {1, 0};
    d.y0 = {0, 0};
    d.y1 = {0, 0};
    d.t = {0, 1};
    d.y = {0, 0};
    Eigen::MatrixXd full = design_matrix(d, true, true);
    REQUIRE(full.cols() == 3);
    CHECK(full(0, 0) == 0.5);
    CHECK(full(0, 1) == 1.0);
    CHECK(full(0, 2) == 0.0);
    CHECK(full(1, 2) == 1.0);
    CHECK(design_matrix(d, false, false).cols() == 1);
    CHECK(design_spec(true, false) == std::vector<std::string>{"z", "a"});
}

} // TEST_SUITE
