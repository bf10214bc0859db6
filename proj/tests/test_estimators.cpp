#include <cmath>

#include <doctest.h>

#include "cfeval/estimators.hpp"
#include "cfeval/rng.hpp"

using namespace cfeval;

namespace {

// Fixed 8-row dataset with dyadic nuisances so every estimate below is an exact
// binary fraction, verified by hand:
//   row:        1      2      3      4      5      6      7      8
//   t:          0      0      1      0      1      0      0      1
//   y:          1      0      1      1      0      0      1      1
//   pi:        0.5    0.5   0.75   0.75  0.875  0.875   0.5   0.75
//   s0:       0.25   0.75    0.5    0.5   0.25   0.75    0.5   0.25
//   yhat:       1      0      1      0      0      1      1      0
//   s:      0.8125 0.1875 0.9375 0.3125 0.0625 0.6875 0.5625 0.4375
// Pseudo-outcomes phi = (1-t)/(1-pi)(y-s0) + s0:
//   (1.75, -0.75, 0.5, 2.5, 0.25, -5.25, 1.5, 0.25), mean 0.09375.
struct HandCase {
    OracleDataset data;
    NuisanceSet nuisances;
    std::vector<std::uint8_t> yhat;
    std::vector<double> scores;
};

HandCase hand_case() {
    HandCase h;
    h.data.t = {0, 0, 1, 0, 1, 0, 0, 1};
    h.data.y = {1, 0, 1, 1, 0, 0, 1, 1};
    h.data.z.assign(8, 0.0);
    h.data.a = {0, 1, 0, 1, 0, 1, 0, 1};
    // Oracle columns unused by the DR path; keep them consistent with y.
    h.data.y0 = h.data.y;
    h.data.y1 = h.data.y;
    h.nuisances.propensity = {0.5, 0.5, 0.75, 0.75, 0.875, 0.875, 0.5, 0.75};
    h.nuisances.cf_scores = {0.25, 0.75, 0.5, 0.5, 0.25, 0.75, 0.5, 0.25};
    h.yhat = {1, 0, 1, 0, 0, 1, 1, 0};
    h.scores = {0.8125, 0.1875, 0.9375, 0.3125, 0.0625, 0.6875, 0.5625, 0.4375};
    return h;
}

const std::vector<double> kPhi = {1.75, -0.75, 0.5, 2.5, 0.25, -5.25, 1.5, 0.25};

// Exact up to accumulated rounding of the dyadic arithmetic.
bool close12(double a, double b) { return std::abs(a - b) <= 1e-12; }

} // namespace

TEST_SUITE("estimators") {

TEST_CASE("pseudo-outcomes match the hand computation exactly") {
    HandCase h = hand_case();
    std::vector<double> phi = pseudo_outcomes(h.data, h.nuisances);
    REQUIRE(phi.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) CHECK(phi[i] == kPhi[i]);
}

TEST_CASE("treated rows collapse to the outcome score exactly") {
    HandCase h = hand_case();
    std::vector<double> phi = pseudo_outcomes(h.data, h.nuisances);
    for (std::size_t i = 0; i < 8; ++i)
        if (h.data.t[i]) CHECK(phi[i] == h.nuisances.cf_scores[i]);
}

TEST_CASE("mean_y0 point estimates: plugin, ipw, dr") {
    HandCase h = hand_case();
    CHECK(estimate_mean_y0(h.data, h.nuisances, MeanMethod::plugin).value == 0.46875);
    CHECK(estimate_mean_y0(h.data, h.nuisances, MeanMethod::ipw).value == 1.0);
    CHECK(estimate_mean_y0(h.data, h.nuisances, MeanMethod::dr).value == 0.09375);
}

TEST_CASE("dr tpr, fpr, precision against hand values") {
    HandCase h = hand_case();
    // TPR = mean(yhat*phi)/mean(phi) = (-0.1875)/0.09375 = -2 (DR estimates may
    // exit [0,1]; the algebra, not the range, is under test here).
    CHECK(dr_tpr(h.data, h.nuisances, h.yhat).value == -2.0);
    // FPR = mean(yhat*(1-phi))/mean(1-phi) = (11/16)/(29/32).
    CHECK(close12(dr_fpr(h.data, h.nuisances, h.yhat).value, (11.0 / 16.0) / (29.0 / 32.0)));
    // precision = mean(phi | yhat=1) = (1.75+0.5-5.25+1.5)/4.
    CHECK(dr_precision(h.data, h.nuisances, h.yhat).value == -0.375);
}

TEST_CASE("dr calibration bin against hand values") {
    HandCase h = hand_case();
    // Scores in [0.25, 0.65]: rows 4, 7, 8 with phi 2.5, 1.5, 0.25.
    auto bin = dr_calibration_bin(h.data, h.nuisances, h.scores, 0.25, 0.65);
    REQUIRE(bin.has_value());
    CHECK(close12(bin->value, 4.25 / 3.0));
    CHECK(bin->n_effective == 3);

    CHECK_FALSE(dr_calibration_bin(h.data, h.nuisances, h.scores, 0.96, 0.99).has_value());
    CHECK_THROWS_AS(dr_calibration_bin(h.data, h.nuisances, h.scores, 0.7, 0.3), ParameterError);
}

TEST_CASE("dr generalized rates against hand values") {
    HandCase h = hand_case();
    Estimate gfnr = mode_gfnr(EvalMode::dr, h.data, &h.nuisances, h.scores);
    Estimate gfpr = mode_gfpr(EvalMode::dr, h.data, &h.nuisances, h.scores);
    CHECK(close12(gfnr.value, 55.0 / 48.0));
    CHECK(close12(gfpr.value, 263.0 / 464.0));
}

TEST_CASE("mean std_error is the n-1 sample formula") {
    std::vector<double> v = {1.0, 2.0, 3.0, 6.0};
    Estimate e = conditional_mean(v, {0, 1, 2, 3}, EstimatorKind::oracle, Metric::mean_y0);
    CHECK(e.value == 3.0);
    // var = ((1-3)^2+(2-3)^2+(3-3)^2+(6-3)^2)/3 = 14/3, se = sqrt(14/3/4).
    CHECK(close12(e.std_error, std::sqrt(14.0 / 3.0 / 4.0)));
    CHECK(close12(e.ci_high - e.value, 1.96 * e.std_error));
}

TEST_CASE("ratio_of_means reproduces the delta-method standard error") {
    Rng rng(17);
    std::vector<double> num(50), den(50);
    for (std::size_t i = 0; i < 50; ++i) {
        den[i] = 0.5 + rng.uniform01();
        num[i] = den[i] * rng.uniform01();
    }
    Estimate e = ratio_of_means(num, den, EstimatorKind::dr, Metric::tpr);

    // Independent implementation.
    double n = 50, ma = 0, mb = 0;
    for (std::size_t i = 0; i < 50; ++i) {
        ma += num[i];
        mb += den[i];
    }
    ma /= n;
    mb /= n;
    double va = 0, vb = 0, cab = 0;
    for (std::size_t i = 0; i < 50; ++i) {
        va += (num[i] - ma) * (num[i] - ma);
        vb += (den[i] - mb) * (den[i] - mb);
        cab += (num[i] - ma) * (den[i] - mb);
    }
    va /= n - 1;
    vb /= n - 1;
    cab /= n - 1;
    double var = (va / (mb * mb) + ma * ma * vb / (mb * mb * mb * mb) -
                  2.0 * ma * cab / (mb * mb * mb)) /
                 n;
    CHECK(close12(e.value, ma / mb));
    CHECK(close12(e.std_error, std::sqrt(var)));
}

TEST_CASE("positivity policy in the dr path") {
    HandCase h = hand_case();
    h.nuisances.propensity[5] = 0.999; // control row
    CHECK_THROWS_AS(pseudo_outcomes(h.data, h.nuisances, 0.01, PositivityPolicy::reject),
                    PositivityError);
    std::vector<double> phi =
        pseudo_outcomes(h.data, h.nuisances, 0.01, PositivityPolicy::winsorize);
    // Row 6 now uses pi = 0.99: phi = (0 - 0.75)/0.01 + 0.75 = -74.25.
    CHECK(close12(phi[5], -74.25));
}

TEST_CASE("mode contexts select the right rows and outcomes") {
    HandCase h = hand_case();
    h.data.y0 = {1, 1, 0, 1, 0, 1, 0, 0};

    ModeContext obs = mode_context(EvalMode::observational, h.data, nullptr);
    REQUIRE(obs.rows.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) CHECK(obs.phi[i] == double(h.data.y[i]));

    ModeContext ctl = mode_context(EvalMode::control, h.data, nullptr);
    REQUIRE(ctl.rows.size() == 5);
    for (std::size_t i = 0; i < ctl.rows.size(); ++i) {
        CHECK(h.data.t[ctl.rows[i]] == 0);
        CHECK(ctl.phi[i] == double(h.data.y[ctl.rows[i]]));
    }

    ModeContext orc = mode_context(EvalMode::oracle, h.data, nullptr);
    for (std::size_t i = 0; i < 8; ++i) CHECK(orc.phi[i] == double(h.data.y0[i]));

    ModeContext dr = mode_context(EvalMode::dr, h.data, &h.nuisances);
    CHECK(dr.phi == kPhi);
    CHECK_THROWS_AS(mode_context(EvalMode::dr, h.data, nullptr), ParameterError);
}

TEST_CASE("binary-outcome modes reduce to classical count ratios") {
    HandCase h = hand_case();
    h.data.y0 = {1, 1, 0, 1, 0, 1, 0, 0};

    // Oracle TPR: predicted positives among y0=1 rows {1,2,4,6}: yhat = 1,0,0,1.
    Estimate tpr = mode_tpr(EvalMode::oracle, h.data, nullptr, h.yhat);
    CHECK(tpr.value == 0.5);
    // Oracle FPR: yhat=1 among y0=0 rows {3,5,7,8}: 1,0,1,0.
    CHECK(mode_fpr(EvalMode::oracle, h.data, nullptr, h.yhat).value == 0.5);
    // Observational base rate = mean(y) = 5/8.
    CHECK(mode_base_rate(EvalMode::observational, h.data, nullptr).value == 0.625);
    // Control base rate = mean(y | t=0) = 3/5.
    CHECK(mode_base_rate(EvalMode::control, h.data, nullptr).value == 0.6);
    // Observational precision = mean(y | yhat=1) over rows {1,3,6,7} = 3/4.
    auto prec = mode_precision(EvalMode::observational, h.data, nullptr, h.yhat);
    REQUIRE(prec.has_value());
    CHECK(prec->value == 0.75);
}

TEST_CASE("degenerate conditioning sets are undefined or missing") {
    HandCase h = hand_case();
    std::vector<std::uint8_t> none(8, 0);
    CHECK_FALSE(mode_precision(EvalMode::observational, h.data, nullptr, none).has_value());

    OracleDataset zeros = h.data;
    zeros.y.assign(8, 0);
    zeros.y0.assign(8, 0);
    CHECK_THROWS_AS(mode_tpr(EvalMode::oracle, zeros, nullptr, h.yhat), UndefinedMetricError);

    OracleDataset treated = h.data;
    treated.t.assign(8, 1);
    CHECK_THROWS_AS(mode_context(EvalMode::control, treated, nullptr), DataError);
}

TEST_CASE("alignment violations throw") {
    HandCase h = hand_case();
    std::vector<std::uint8_t> short_labels(3, 1);
    CHECK_THROWS_AS(dr_tpr(h.data, h.nuisances, short_labels), AlignmentError);
    NuisanceSet bad = h.nuisances;
    bad.propensity.pop_back();
    CHECK_THROWS_AS(pseudo_outcomes(h.data, bad), AlignmentError);
}

TEST_CASE("eval mode names round trip") {
    for (EvalMode mode : {EvalMode::observational, EvalMode::control, EvalMode::dr,
                          EvalMode::oracle})
        CHECK(eval_mode_from_string(to_string(mode)) == mode);
    CHECK_THROWS_AS(eval_mode_from_string("nope"), ParameterError);
}

} // TEST_SUITE
