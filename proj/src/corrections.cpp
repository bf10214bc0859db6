#include "cfeval/corrections.hpp"

#include <cmath>
#include <limits>

#include "cfeval/common.hpp"

namespace cfeval {

std::vector<double> ReweighPlan::row_weights(const OracleDataset& dataset) const {
    std::vector<double> weights(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i)
        weights[i] = w[dataset.a[i]][dataset.y[i]];
    return weights;
}

ReweighPlan kamiran_weights(const OracleDataset& dataset) {
    if (dataset.size() == 0) throw DataError("reweighing an empty dataset");
    double n = static_cast<double>(dataset.size());
    double n_a[2] = {0, 0}, n_y[2] = {0, 0}, n_ay[2][2] = {{0, 0}, {0, 0}};
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        n_a[dataset.a[i]] += 1;
        n_y[dataset.y[i]] += 1;
        n_ay[dataset.a[i]][dataset.y[i]] += 1;
    }
    ReweighPlan plan;
    for (int a = 0; a < 2; ++a)
        for (int y = 0; y < 2; ++y) {
            if (n_ay[a][y] == 0)
                throw DataError("reweighing cell (a=" + std::to_string(a) +
                                ", y=" + std::to_string(y) + ") is empty");
            plan.w[a][y] = (n_a[a] / n) * (n_y[y] / n) / (n_ay[a][y] / n);
        }
    return plan;
}

namespace {

// Group mean of a binary column, optionally weighted.
template <typename Col>
double group_rate(const OracleDataset& d, const Col& col, int group,
                  const std::vector<double>* weights) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.a[i] != group) continue;
        double w = weights ? (*weights)[i] : 1.0;
        num += w * col[i];
        den += w;
    }
    if (den == 0) throw DataError("group a=" + std::to_string(group) + " is empty");
    return num / den;
}

template <typename Col>
double rate_disparity(const OracleDataset& d, const Col& col, const std::vector<double>* weights) {
    return group_rate(d, col, 1, weights) - group_rate(d, col, 0, weights);
}

} // namespace

std::vector<ReweighPoint> reweigh_experiment(const std::vector<double>& k_grid, double c,
                                             std::size_t n, std::uint64_t seed, int bootstrap) {
    if (k_grid.empty()) throw ParameterError("k grid must be non-empty");
    if (bootstrap < 0) throw ParameterError("bootstrap count must be nonnegative");
    std::vector<ReweighPoint> points;
    Rng root(seed);
    for (std::size_t idx = 0; idx < k_grid.size(); ++idx) {
        Rng point_rng = root.substream(idx);
        GeneratorParams params;
        params.n = n;
        params.c = c;
        params.k = k_grid[idx];
        params.seed = point_rng.substream(0).seed();
        OracleDataset data = generate(params);
        ReweighPlan plan = kamiran_weights(data);
        std::vector<double> weights = plan.row_weights(data);

        ReweighPoint point;
        point.k = k_grid[idx];
        point.obs_disparity_before = rate_disparity(data, data.y, nullptr);
        point.obs_disparity_after = rate_disparity(data, data.y, &weights);
        point.cf_disparity_before = rate_disparity(data, data.y0, nullptr);
        point.cf_disparity_after = rate_disparity(data, data.y0, &weights);

        double sum_o = 0, sumsq_o = 0, sum_c = 0, sumsq_c = 0;
        int valid = 0;
        for (int b = 0; b < bootstrap; ++b) {
            Rng rng = point_rng.substream(static_cast<std::uint64_t>(b) + 1);
            std::vector<std::size_t> rows(data.size());
            for (std::size_t i = 0; i < data.size(); ++i)
                rows[i] = rng.uniform_below(data.size());
            OracleDataset re = subset(data, rows);
            ReweighPlan re_plan;
            try {
                re_plan = kamiran_weights(re);
            } catch (const DataError&) {
                continue; // resample lost a cell
            }
            std::vector<double> re_w = re_plan.row_weights(re);
            double o = rate_disparity(re, re.y, &re_w);
            double cf = rate_disparity(re, re.y0, &re_w);
            sum_o += o;
            sumsq_o += o * o;
            sum_c += cf;
            sumsq_c += cf * cf;
            ++valid;
        }
        if (valid > 1) {
            double mo = sum_o / valid, mc = sum_c / valid;
            double vo = (sumsq_o - valid * mo * mo) / (valid - 1);
            double vc = (sumsq_c - valid * mc * mc) / (valid - 1);
            point.obs_after_std_error = vo > 0 ? std::sqrt(vo) : 0.0;
            point.cf_after_std_error = vc > 0 ? std::sqrt(vc) : 0.0;
        }
        points.push_back(point);
    }
    return points;
}

RatePair expected_mixed_rates(const RatePair& original, double mu, double lambda) {
    if (lambda < 0 || lambda > 1) throw ParameterError("lambda must lie in [0, 1]");
    return {(1.0 - lambda) * original.gfnr + lambda * (1.0 - mu),
            (1.0 - lambda) * original.gfpr + lambda * mu};
}

MixingPolicy search_mixing_policy(const std::vector<double>& scores,
                                  const std::vector<std::uint8_t>& y,
                                  const std::vector<std::uint8_t>& a, double step) {
    if (scores.size() != y.size() || scores.size() != a.size())
        throw AlignmentError("scores, labels, and groups differ in length");
    if (scores.empty()) throw DataError("mixing search on empty data");
    if (step <= 0 || step > 1) throw ParameterError("grid step must lie in (0, 1]");

    // Per-group observed base rate and generalized rates.
    RatePair original[2];
    double mu[2];
    for (int g = 0; g < 2; ++g) {
        double n_g = 0, n_pos = 0, sum_s_pos = 0, sum_s_neg = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (a[i] != g) continue;
            n_g += 1;
            if (y[i]) {
                n_pos += 1;
                sum_s_pos += scores[i];
            } else {
                sum_s_neg += scores[i];
            }
        }
        if (n_g == 0) throw DataError("group a=" + std::to_string(g) + " is empty");
        if (n_pos == 0 || n_pos == n_g)
            throw DataError("group a=" + std::to_string(g) +
                            " has a degenerate base rate; trivial-predictor mixing is undefined");
        mu[g] = n_pos / n_g;
        original[g].gfnr = 1.0 - sum_s_pos / n_pos;
        original[g].gfpr = sum_s_neg / (n_g - n_pos);
    }

    auto lambda_at = [&](int i) { return std::min(1.0, i * step); };
    int steps = static_cast<int>(std::floor(1.0 / step + 1e-9));
    if (lambda_at(steps) < 1.0) ++steps;

    MixingPolicy best;
    best.mu = {mu[0], mu[1]};
    double best_obj = std::numeric_limits<double>::infinity();
    double best_sum = std::numeric_limits<double>::infinity();
    std::size_t evaluations = 0;
    for (int i0 = 0; i0 <= steps; ++i0) {
        double l0 = lambda_at(i0);
        RatePair r0 = expected_mixed_rates(original[0], mu[0], l0);
        for (int i1 = 0; i1 <= steps; ++i1) {
            double l1 = lambda_at(i1);
            RatePair r1 = expected_mixed_rates(original[1], mu[1], l1);
            double d_gfnr = r1.gfnr - r0.gfnr;
            double d_gfpr = r1.gfpr - r0.gfpr;
            double obj = d_gfnr * d_gfnr + d_gfpr * d_gfpr;
            ++evaluations;
            bool better = obj < best_obj ||
                          (obj == best_obj && l0 + l1 < best_sum) ||
                          (obj == best_obj && l0 + l1 == best_sum && l0 < best.lambda[0]);
            if (better) {
                best_obj = obj;
                best_sum = l0 + l1;
                best.lambda = {l0, l1};
            }
        }
    }
    best.objective = best_obj;
    best.grid_evaluations = evaluations;
    return best;
}

std::vector<double> apply_mixing(const std::vector<double>& scores,
                                 const std::vector<std::uint8_t>& a, const MixingPolicy& policy,
                                 Rng& rng, std::vector<std::uint8_t>* mixed_flags) {
    if (scores.size() != a.size())
        throw AlignmentError("scores and groups differ in length");
    std::vector<double> adjusted(scores);
    if (mixed_flags) mixed_flags->assign(scores.size(), 0);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        int g = a[i];
        if (rng.bernoulli(policy.lambda[g])) {
            adjusted[i] = policy.mu[g];
            if (mixed_flags) (*mixed_flags)[i] = 1;
        }
    }
    return adjusted;
}

PostprocessResult postprocess_equalized_odds(const OracleDataset& calibration,
                                             const std::vector<double>& scores,
                                             std::uint64_t seed) {
    if (scores.size() != calibration.size())
        throw AlignmentError("scores are not aligned with the calibration data");
    for (double s : scores)
        if (!(s >= 0.0 && s <= 1.0))
            throw ParameterError("scores must lie in [0, 1]");
    PostprocessResult result;
    result.policy = search_mixing_policy(scores, calibration.y, calibration.a);
    Rng rng(seed);
    result.adjusted_scores =
        apply_mixing(scores, calibration.a, result.policy, rng, &result.mixed);
    return result;
}

} // namespace cfeval
