#include "cfeval/curves.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace cfeval {

namespace {

bool sorted_ascending(const std::vector<double>& v) {
    return std::is_sorted(v.begin(), v.end());
}

std::vector<std::uint8_t> labels_at(const std::vector<double>& scores, double threshold) {
    std::vector<std::uint8_t> labels(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i)
        labels[i] = scores[i] >= threshold ? 1 : 0;
    return labels;
}

} // namespace

std::vector<double> threshold_grid(std::size_t count) {
    if (count < 2) throw ParameterError("threshold grid needs at least two points");
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i)
        grid[i] = static_cast<double>(i) / static_cast<double>(count - 1);
    return grid;
}

Curve pr_curve(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
               const std::vector<double>& scores, const std::vector<double>& thresholds,
               const std::string& model_name, double clip, PositivityPolicy policy) {
    if (scores.size() != dataset.size())
        throw AlignmentError("scores are not aligned with the dataset");
    if (thresholds.empty() || !sorted_ascending(thresholds))
        throw ParameterError("thresholds must be non-empty and sorted ascending");
    Curve curve{model_name, mode, "pr", {}, 0};
    ModeContext ctx = mode_context(mode, dataset, nuisances, clip, policy);
    std::vector<double> s;
    s.reserve(ctx.rows.size());
    for (std::size_t r : ctx.rows) s.push_back(scores[r]);
    std::size_t n = ctx.phi.size();
    std::vector<double> num(n), den(ctx.phi);
    for (double tau : thresholds) {
        std::vector<std::uint8_t> preds = labels_at(s, tau);
        std::vector<std::size_t> positives;
        for (std::size_t i = 0; i < n; ++i)
            if (preds[i]) positives.push_back(i);
        if (positives.empty()) {
            ++curve.omitted;
            continue;
        }
        for (std::size_t i = 0; i < n; ++i) num[i] = preds[i] ? ctx.phi[i] : 0.0;
        try {
            Estimate recall = ratio_of_means(num, den, ctx.kind, Metric::tpr);
            Estimate prec = conditional_mean(ctx.phi, positives, ctx.kind, Metric::precision);
            curve.points.push_back({tau, recall.value, prec.value, prec.ci_low, prec.ci_high});
        } catch (const UndefinedMetricError&) {
            ++curve.omitted;
        }
    }
    return curve;
}

Curve roc_curve(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
                const std::vector<double>& scores, const std::vector<double>& thresholds,
                const std::string& model_name, double clip, PositivityPolicy policy) {
    if (scores.size() != dataset.size())
        throw AlignmentError("scores are not aligned with the dataset");
    if (thresholds.empty() || !sorted_ascending(thresholds))
        throw ParameterError("thresholds must be non-empty and sorted ascending");
    Curve curve{model_name, mode, "roc", {}, 0};
    ModeContext ctx = mode_context(mode, dataset, nuisances, clip, policy);
    std::vector<double> s;
    s.reserve(ctx.rows.size());
    for (std::size_t r : ctx.rows) s.push_back(scores[r]);
    std::size_t n = ctx.phi.size();
    std::vector<double> tpr_num(n), tpr_den(ctx.phi), fpr_num(n), fpr_den(n);
    for (std::size_t i = 0; i < n; ++i) fpr_den[i] = 1.0 - ctx.phi[i];
    for (double tau : thresholds) {
        std::vector<std::uint8_t> preds = labels_at(s, tau);
        for (std::size_t i = 0; i < n; ++i) {
            tpr_num[i] = preds[i] ? ctx.phi[i] : 0.0;
            fpr_num[i] = preds[i] ? 1.0 - ctx.phi[i] : 0.0;
        }
        try {
            Estimate tpr = ratio_of_means(tpr_num, tpr_den, ctx.kind, Metric::tpr);
            Estimate fpr = ratio_of_means(fpr_num, fpr_den, ctx.kind, Metric::fpr);
            curve.points.push_back({tau, fpr.value, tpr.value, tpr.ci_low, tpr.ci_high});
        } catch (const UndefinedMetricError&) {
            ++curve.omitted;
        }
    }
    return curve;
}

Curve calibration_curve(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
                        const std::vector<double>& scores, int n_bins,
                        const std::string& model_name, double clip, PositivityPolicy policy) {
    if (scores.size() != dataset.size())
        throw AlignmentError("scores are not aligned with the dataset");
    if (n_bins < 1) throw ParameterError("calibration needs at least one bin");
    Curve curve{model_name, mode, "calibration", {}, 0};
    ModeContext ctx = mode_context(mode, dataset, nuisances, clip, policy);
    double width = 1.0 / static_cast<double>(n_bins);
    for (int b = 0; b < n_bins; ++b) {
        double r1 = static_cast<double>(b) * width;
        double r2 = static_cast<double>(b + 1) * width;
        std::vector<std::size_t> in_bin;
        for (std::size_t j = 0; j < ctx.rows.size(); ++j) {
            double s = scores[ctx.rows[j]];
            if (s >= r1 && s <= r2) in_bin.push_back(j);
        }
        if (in_bin.empty()) {
            ++curve.omitted;
            continue;
        }
        Estimate e = conditional_mean(ctx.phi, in_bin, ctx.kind, Metric::calibration_bin);
        curve.points.push_back({(r1 + r2) / 2.0, (r1 + r2) / 2.0, e.value, e.ci_low, e.ci_high});
    }
    return curve;
}

namespace {

double trapezoid_area(std::vector<std::pair<double, double>> xy) {
    if (xy.size() < 2) return 0.0;
    std::sort(xy.begin(), xy.end());
    double area = 0;
    for (std::size_t i = 1; i < xy.size(); ++i) {
        double dx = xy[i].first - xy[i - 1].first;
        area += dx * (xy[i].second + xy[i - 1].second) / 2.0;
    }
    return area;
}

} // namespace

double area_under_pr(const Curve& curve) {
    if (curve.kind != "pr") throw ParameterError("area_under_pr expects a pr curve");
    // One point per recall level, keeping the best precision reached there,
    // with the smallest-recall precision extended flat to recall zero.
    std::map<double, double> best;
    for (const CurvePoint& p : curve.points) {
        auto [it, inserted] = best.try_emplace(p.x, p.y);
        if (!inserted) it->second = std::max(it->second, p.y);
    }
    if (best.empty()) return 0.0;
    std::vector<std::pair<double, double>> xy(best.begin(), best.end());
    if (xy.front().first > 0.0) xy.insert(xy.begin(), {0.0, xy.front().second});
    return trapezoid_area(std::move(xy));
}

double area_under_roc(const Curve& curve) {
    if (curve.kind != "roc") throw ParameterError("area_under_roc expects a roc curve");
    std::vector<std::pair<double, double>> xy;
    xy.reserve(curve.points.size());
    for (const CurvePoint& p : curve.points) xy.emplace_back(p.x, p.y);
    return trapezoid_area(std::move(xy));
}

double max_pointwise_gap(const Curve& a, const Curve& b) {
    double gap = 0;
    bool any = false;
    for (const CurvePoint& pa : a.points) {
        for (const CurvePoint& pb : b.points) {
            if (pa.param == pb.param) {
                gap = std::max(gap, std::abs(pa.y - pb.y));
                any = true;
                break;
            }
        }
    }
    if (!any) throw DataError("curves share no parameters");
    return gap;
}

} // namespace cfeval
