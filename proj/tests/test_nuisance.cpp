#include <cmath>

#include <doctest.h>

#include "cfeval/nuisance.hpp"

using namespace cfeval;

namespace {

OracleDataset sample(std::size_t n = 20000, double k = 1.6, std::uint64_t seed = 1) {
    GeneratorParams p;
    p.n = n;
    p.k = k;
    p.seed = seed;
    return generate(p);
}

} // namespace

TEST_SUITE("nuisance") {

TEST_CASE("counterfactual model is the control-rows logistic fit") {
    OracleDataset d = sample(5000);
    ScoreModel via_api = fit_counterfactual(d);

    std::vector<std::size_t> control;
    for (std::size_t i = 0; i < d.size(); ++i)
        if (!d.t[i]) control.push_back(i);
    OracleDataset controls = subset(d, control);
    ScoreModel direct = fit_logistic(design_matrix(controls, true, false), controls.y, {}, {},
                                     design_spec(true, false));
    CHECK(via_api.intercept == direct.intercept);
    CHECK(via_api.coefficients(0) == direct.coefficients(0));
}

TEST_CASE("propensity model recovers the assignment law") {
    OracleDataset d = sample(50000);
    ScoreModel pi = fit_propensity(d);
    // P(T=1|Z,A) = sigmoid(z - 0.5 + 1.6 a): features (z, a).
    REQUIRE(pi.coefficients.size() == 2);
    CHECK(std::abs(pi.intercept - (-0.5)) < 0.08);
    CHECK(std::abs(pi.coefficients(0) - 1.0) < 0.08);
    CHECK(std::abs(pi.coefficients(1) - 1.6) < 0.08);
}

TEST_CASE("attach_scores aligns and bounds all vectors") {
    OracleDataset d = sample(3000);
    NuisanceModels models = fit_nuisance_models(d);
    NuisanceSet nu = attach_scores(d, models);
    REQUIRE(nu.propensity.size() == d.size());
    REQUIRE(nu.cf_scores.size() == d.size());
    REQUIRE(nu.obs_scores.has_value());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(nu.propensity[i] > 0.0);
        CHECK(nu.propensity[i] < 1.0);
        CHECK(nu.cf_scores[i] > 0.0);
        CHECK(nu.cf_scores[i] < 1.0);
    }
}

TEST_CASE("observational model can include the treatment feature") {
    OracleDataset d = sample(5000);
    ScoreModel without = fit_observational(d, false);
    ScoreModel with = fit_observational(d, true);
    CHECK(without.feature_spec == std::vector<std::string>{"z", "a"});
    CHECK(with.feature_spec == std::vector<std::string>{"z", "a", "t"});
    // Treatment suppresses the outcome (y1 rate is far below y0 rate).
    CHECK(with.coefficients(2) < 0.0);
}

TEST_CASE("oracle nuisances equal the analytic probabilities") {
    OracleDataset d = sample(200);
    NuisanceSet nu = oracle_nuisances(d);
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(nu.propensity[i] == true_propensity(d.z[i], d.a[i], d.params));
        CHECK(nu.cf_scores[i] == true_s0(d.z[i], d.params));
    }
}

TEST_CASE("enforce_positivity rejects or winsorizes") {
    std::vector<double> pi = {0.5, 0.995, 0.2, 0.9991};
    std::vector<double> copy = pi;
    CHECK_THROWS_AS(enforce_positivity(copy, 0.01, PositivityPolicy::reject), PositivityError);
    try {
        std::vector<double> again = pi;
        enforce_positivity(again, 0.01, PositivityPolicy::reject);
    } catch (const PositivityError& e) {
        CHECK(e.rows == std::vector<std::size_t>{1, 3});
    }
    enforce_positivity(pi, 0.01, PositivityPolicy::winsorize);
    CHECK(pi[0] == 0.5);
    CHECK(pi[1] == 0.99);
    CHECK(pi[2] == 0.2);
    CHECK(pi[3] == 0.99);
}

TEST_CASE("shift correction reweights the control fit") {
    OracleDataset d = sample(20000);
    ScoreModel plain = fit_counterfactual(d, false);
    ScoreModel shifted = fit_counterfactual(d, true);
    CHECK(plain.coefficients(0) != shifted.coefficients(0));
    // Both stay close to the true outcome law sigmoid(z - 0.5).
    CHECK(std::abs(shifted.intercept - (-0.5)) < 0.1);
    CHECK(std::abs(shifted.coefficients(0) - 1.0) < 0.1);
}

TEST_CASE("nuisance subset keeps row alignment") {
    OracleDataset d = sample(100);
    NuisanceSet nu = oracle_nuisances(d);
    std::vector<std::size_t> rows = {5, 50, 99};
    NuisanceSet s = subset(nu, rows);
    REQUIRE(s.propensity.size() == 3);
    CHECK(s.propensity[1] == nu.propensity[50]);
    CHECK(s.cf_scores[2] == nu.cf_scores[99]);
}

} // TEST_SUITE
