#include <cmath>

#include <doctest.h>

#include "cfeval/corrections.hpp"

using namespace cfeval;

namespace {

OracleDataset bits(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& y) {
    OracleDataset d;
    d.a = a;
    d.y = y;
    d.z.assign(a.size(), 0.0);
    d.y0 = y;
    d.y1.assign(a.size(), 0);
    d.t.assign(a.size(), 0);
    return d;
}

double weighted_rate(const OracleDataset& d, const std::vector<double>& w, int group) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.a[i] != group) continue;
        den += w[i];
        num += w[i] * d.y[i];
    }
    return num / den;
}

OracleDataset random_bits(Rng& rng, std::size_t n) {
    std::vector<std::uint8_t> a, y;
    for (std::size_t i = 0; i < n; ++i) {
        a.push_back(rng.bernoulli(0.5));
        y.push_back(rng.bernoulli(0.3 + 0.3 * a.back()));
    }
    return bits(a, y);
}

bool has_all_cells(const OracleDataset& d) {
    int counts[2][2] = {};
    for (std::size_t i = 0; i < d.size(); ++i) counts[d.a[i]][d.y[i]]++;
    return counts[0][0] && counts[0][1] && counts[1][0] && counts[1][1];
}

} // namespace

TEST_SUITE("corrections") {

TEST_CASE("kamiran weights match the closed form on hand counts") {
    // a: 4 zeros, 4 ones; y rates differ by group.
    OracleDataset d = bits({0, 0, 0, 0, 1, 1, 1, 1}, {1, 0, 0, 0, 1, 1, 1, 0});
    ReweighPlan plan = kamiran_weights(d);
    // P(a=0)=0.5, P(y=1)=0.5, P(a=0,y=1)=1/8 -> w = 0.25/0.125 = 2.
    CHECK(plan.weight(0, 1) == 2.0);
    // P(a=0,y=0)=3/8 -> 0.25/0.375 = 2/3.
    CHECK(std::abs(plan.weight(0, 0) - 2.0 / 3.0) <= 1e-12);
    CHECK(std::abs(plan.weight(1, 1) - 2.0 / 3.0) <= 1e-12);
    CHECK(plan.weight(1, 0) == 2.0);

    std::vector<double> w = plan.row_weights(d);
    CHECK(w[0] == 2.0);
    CHECK(w[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("reweighing equalizes observed base rates exactly") {
    Rng rng(31);
    int instances = 0;
    while (instances < 120) {
        OracleDataset d = random_bits(rng, 30 + rng.uniform_below(100));
        if (!has_all_cells(d)) continue;
        ++instances;
        std::vector<double> w = kamiran_weights(d).row_weights(d);
        CHECK(std::abs(weighted_rate(d, w, 1) - weighted_rate(d, w, 0)) <= 1e-12);
    }
}

TEST_CASE("kamiran weights need every (a, y) cell") {
    OracleDataset d = bits({0, 0, 1, 1}, {1, 1, 1, 0});
    CHECK_THROWS_AS(kamiran_weights(d), DataError);
    OracleDataset empty;
    CHECK_THROWS_AS(kamiran_weights(empty), DataError);
}

TEST_CASE("expected mixed rates: endpoints and affinity") {
    Rng rng(33);
    for (int trial = 0; trial < 120; ++trial) {
        RatePair base{rng.uniform01(), rng.uniform01()};
        double mu = rng.uniform01();
        double lambda = rng.uniform01();
        RatePair at0 = expected_mixed_rates(base, mu, 0.0);
        RatePair at1 = expected_mixed_rates(base, mu, 1.0);
        CHECK(at0.gfnr == base.gfnr);
        CHECK(at0.gfpr == base.gfpr);
        CHECK(at1.gfnr == 1.0 - mu);
        CHECK(at1.gfpr == mu);
        RatePair mixed = expected_mixed_rates(base, mu, lambda);
        CHECK(std::abs(mixed.gfnr - ((1 - lambda) * at0.gfnr + lambda * at1.gfnr)) <= 1e-12);
        CHECK(std::abs(mixed.gfpr - ((1 - lambda) * at0.gfpr + lambda * at1.gfpr)) <= 1e-12);
    }
    CHECK_THROWS_AS(expected_mixed_rates(RatePair{0.5, 0.5}, 0.5, 1.5), ParameterError);
    CHECK_THROWS_AS(expected_mixed_rates(RatePair{0.5, 0.5}, 0.5, -0.1), ParameterError);
}

TEST_CASE("mixing search minimizes the disparity objective on the grid") {
    // Group 0: y = (1,1,0,0) scores (0.9,0.6,0.4,0.2); group 1 rates differ.
    std::vector<double> scores = {0.9, 0.6, 0.4, 0.2, 0.8, 0.3, 0.3, 0.1};
    std::vector<std::uint8_t> y = {1, 1, 0, 0, 1, 1, 0, 0};
    std::vector<std::uint8_t> a = {0, 0, 0, 0, 1, 1, 1, 1};
    MixingPolicy policy = search_mixing_policy(scores, y, a, 0.05);

    // Independent check: group rates, then exhaustive grid scan.
    double g0_gfnr = 1 - (0.9 + 0.6) / 2, g0_gfpr = (0.4 + 0.2) / 2;
    double g1_gfnr = 1 - (0.8 + 0.3) / 2, g1_gfpr = (0.3 + 0.1) / 2;
    double mu0 = 0.5, mu1 = 0.5;
    double best = 1e300;
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; j <= 20; ++j) {
            double l0 = i * 0.05, l1 = j * 0.05;
            double gfnr0 = (1 - l0) * g0_gfnr + l0 * (1 - mu0);
            double gfpr0 = (1 - l0) * g0_gfpr + l0 * mu0;
            double gfnr1 = (1 - l1) * g1_gfnr + l1 * (1 - mu1);
            double gfpr1 = (1 - l1) * g1_gfpr + l1 * mu1;
            double obj = (gfnr1 - gfnr0) * (gfnr1 - gfnr0) + (gfpr1 - gfpr0) * (gfpr1 - gfpr0);
            if (obj < best) best = obj;
        }
    CHECK(std::abs(policy.objective - best) <= 1e-12);
    CHECK(policy.grid_evaluations == 21 * 21);
    CHECK(policy.mu[0] == mu0);
    CHECK(policy.mu[1] == mu1);
}

TEST_CASE("identical groups choose no mixing by the tie-break") {
    std::vector<double> scores = {0.9, 0.6, 0.4, 0.2, 0.9, 0.6, 0.4, 0.2};
    std::vector<std::uint8_t> y = {1, 1, 0, 0, 1, 1, 0, 0};
    std::vector<std::uint8_t> a = {0, 0, 0, 0, 1, 1, 1, 1};
    MixingPolicy policy = search_mixing_policy(scores, y, a, 0.1);
    CHECK(policy.lambda[0] == 0.0);
    CHECK(policy.lambda[1] == 0.0);
    CHECK(policy.objective == 0.0);
}

TEST_CASE("mixing search rejects degenerate groups") {
    std::vector<double> scores = {0.9, 0.6, 0.4, 0.2};
    CHECK_THROWS_AS(search_mixing_policy(scores, {1, 1, 1, 1}, {0, 0, 1, 1}, 0.1), DataError);
    CHECK_THROWS_AS(search_mixing_policy(scores, {1, 0, 1, 0}, {0, 0, 0, 0}, 0.1), DataError);
}

TEST_CASE("apply_mixing endpoints and flags") {
    std::vector<double> scores = {0.9, 0.6, 0.4, 0.2};
    std::vector<std::uint8_t> a = {0, 1, 0, 1};
    MixingPolicy none;
    none.lambda = {0.0, 0.0};
    none.mu = {0.5, 0.7};
    Rng rng(1);
    CHECK(apply_mixing(scores, a, none, rng) == scores);

    MixingPolicy full;
    full.lambda = {1.0, 1.0};
    full.mu = {0.5, 0.7};
    Rng rng2(1);
    std::vector<std::uint8_t> flags;
    std::vector<double> mixed = apply_mixing(scores, a, full, rng2, &flags);
    CHECK(mixed == std::vector<double>{0.5, 0.7, 0.5, 0.7});
    CHECK(flags == std::vector<std::uint8_t>{1, 1, 1, 1});

    MixingPolicy half;
    half.lambda = {0.5, 0.5};
    half.mu = {0.5, 0.7};
    Rng rng3(8);
    std::vector<double> once = apply_mixing(scores, a, half, rng3, &flags);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(once[i] == (flags[i] ? half.mu[a[i]] : scores[i]));
    Rng rng4(8);
    CHECK(apply_mixing(scores, a, half, rng4) == once);
}

TEST_CASE("postprocess returns a policy fitted on the calibration rows") {
    GeneratorParams p;
    p.n = 5000;
    OracleDataset d = generate(p);
    std::vector<double> scores(d.size());
    Rng rng(2);
    for (double& s : scores) s = 0.05 + 0.9 * rng.uniform01();
    PostprocessResult result = postprocess_equalized_odds(d, scores, 11);
    REQUIRE(result.adjusted_scores.size() == d.size());
    REQUIRE(result.mixed.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(result.adjusted_scores[i] >= 0.0);
        CHECK(result.adjusted_scores[i] <= 1.0);
        if (!result.mixed[i]) CHECK(result.adjusted_scores[i] == scores[i]);
    }
    PostprocessResult again = postprocess_equalized_odds(d, scores, 11);
    CHECK(again.adjusted_scores == result.adjusted_scores);
}

TEST_CASE("reweigh experiment zeroes the observed disparity") {
    std::vector<ReweighPoint> points = reweigh_experiment({0.0, 1.6}, 0.1, 3000, 5, 20);
    REQUIRE(points.size() == 2);
    CHECK(points[0].k == 0.0);
    CHECK(points[1].k == 1.6);
    for (const ReweighPoint& pt : points) CHECK(std::abs(pt.obs_disparity_after) <= 1e-12);
    CHECK(std::abs(points[1].obs_disparity_before) > 0.01);
    std::vector<ReweighPoint> again = reweigh_experiment({0.0, 1.6}, 0.1, 3000, 5, 20);
    CHECK(again[1].cf_disparity_after == points[1].cf_disparity_after);
    CHECK(again[1].cf_after_std_error == points[1].cf_after_std_error);
}

} // TEST_SUITE
