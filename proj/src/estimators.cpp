#include "cfeval/estimators.hpp"

#include <cmath>
#include <numeric>

namespace cfeval {

namespace {

void check_alignment(const OracleDataset& dataset, const NuisanceSet& nuisances) {
    if (nuisances.propensity.size() != dataset.size() ||
        nuisances.cf_scores.size() != dataset.size())
        throw AlignmentError("nuisance vectors are not aligned with the dataset");
}

struct MeanVar {
    double mean = 0;
    double variance = 0; // sample variance
    std::size_t n = 0;
};

MeanVar mean_var(const std::vector<double>& values) {
    MeanVar mv;
    mv.n = values.size();
    if (mv.n == 0) return mv;
    mv.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(mv.n);
    if (mv.n > 1) {
        double ss = 0;
        for (double v : values) ss += (v - mv.mean) * (v - mv.mean);
        mv.variance = ss / static_cast<double>(mv.n - 1);
    }
    return mv;
}

Estimate mean_estimate(const std::vector<double>& terms, EstimatorKind kind, Metric metric) {
    if (terms.empty()) throw UndefinedMetricError("estimate over an empty set");
    MeanVar mv = mean_var(terms);
    double se = mv.n > 1 ? std::sqrt(mv.variance / static_cast<double>(mv.n)) : 0.0;
    return make_estimate(mv.mean, se, mv.n, kind, metric);
}

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

} // namespace

std::vector<double> pseudo_outcomes(const OracleDataset& dataset, const NuisanceSet& nuisances,
                                    double clip, PositivityPolicy policy) {
    check_alignment(dataset, nuisances);
    std::vector<double> pi = nuisances.propensity;
    enforce_positivity(pi, clip, policy);
    std::vector<double> phi(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        double s0 = nuisances.cf_scores[i];
        if (dataset.t[i]) {
            phi[i] = s0; // treated-row collapse, exact
        } else {
            phi[i] = (dataset.y[i] - s0) / (1.0 - pi[i]) + s0;
        }
    }
    return phi;
}

Estimate estimate_mean_y0(const OracleDataset& dataset, const NuisanceSet& nuisances,
                          MeanMethod method, double clip, PositivityPolicy policy) {
    check_alignment(dataset, nuisances);
    switch (method) {
        case MeanMethod::plugin:
            return mean_estimate(nuisances.cf_scores, EstimatorKind::plugin, Metric::mean_y0);
        case MeanMethod::ipw: {
            std::vector<double> pi = nuisances.propensity;
            enforce_positivity(pi, clip, policy);
            std::vector<double> terms(dataset.size());
            for (std::size_t i = 0; i < dataset.size(); ++i)
                terms[i] = dataset.t[i] ? 0.0 : dataset.y[i] / (1.0 - pi[i]);
            return mean_estimate(terms, EstimatorKind::ipw, Metric::mean_y0);
        }
        case MeanMethod::dr: {
            std::vector<double> phi = pseudo_outcomes(dataset, nuisances, clip, policy);
            return mean_estimate(phi, EstimatorKind::dr, Metric::mean_y0);
        }
    }
    throw ParameterError("unknown mean method");
}

Estimate ratio_of_means(const std::vector<double>& numerator_terms,
                        const std::vector<double>& denominator_terms, EstimatorKind kind,
                        Metric metric) {
    if (numerator_terms.size() != denominator_terms.size())
        throw AlignmentError("ratio_of_means: term vectors differ in length");
    std::size_t n = numerator_terms.size();
    if (n == 0) throw UndefinedMetricError("ratio over an empty set");
    double a = std::accumulate(numerator_terms.begin(), numerator_terms.end(), 0.0) /
               static_cast<double>(n);
    double b = std::accumulate(denominator_terms.begin(), denominator_terms.end(), 0.0) /
               static_cast<double>(n);
    if (b <= 0)
        throw UndefinedMetricError("ratio estimator has a nonpositive denominator (" +
                                   to_string(metric) + ")");
    double value = a / b;
    double se = 0;
    if (n > 1) {
        double va = 0, vb = 0, cab = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double da = numerator_terms[i] - a;
            double db = denominator_terms[i] - b;
            va += da * da;
            vb += db * db;
            cab += da * db;
        }
        double denom = static_cast<double>(n - 1);
        va /= denom;
        vb /= denom;
        cab /= denom;
        double var = (va / (b * b) + a * a * vb / (b * b * b * b) -
                      2.0 * a * cab / (b * b * b)) /
                     static_cast<double>(n);
        se = var > 0 ? std::sqrt(var) : 0.0;
    }
    return make_estimate(value, se, n, kind, metric);
}

Estimate conditional_mean(const std::vector<double>& values, const std::vector<std::size_t>& rows,
                          EstimatorKind kind, Metric metric) {
    std::vector<double> selected;
    selected.reserve(rows.size());
    for (std::size_t r : rows) selected.push_back(values[r]);
    return mean_estimate(selected, kind, metric);
}

namespace {

Estimate tpr_from_phi(const std::vector<double>& phi, const std::vector<std::uint8_t>& preds,
                      EstimatorKind kind) {
    std::vector<double> num(phi.size()), den(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        num[i] = preds[i] ? phi[i] : 0.0;
        den[i] = phi[i];
    }
    return ratio_of_means(num, den, kind, Metric::tpr);
}

Estimate fpr_from_phi(const std::vector<double>& phi, const std::vector<std::uint8_t>& preds,
                      EstimatorKind kind) {
    std::vector<double> num(phi.size()), den(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        num[i] = preds[i] ? 1.0 - phi[i] : 0.0;
        den[i] = 1.0 - phi[i];
    }
    return ratio_of_means(num, den, kind, Metric::fpr);
}

std::optional<Estimate> precision_from_phi(const std::vector<double>& phi,
                                           const std::vector<std::uint8_t>& preds,
                                           EstimatorKind kind) {
    std::vector<std::size_t> positives;
    for (std::size_t i = 0; i < phi.size(); ++i)
        if (preds[i]) positives.push_back(i);
    if (positives.empty()) return std::nullopt;
    return conditional_mean(phi, positives, kind, Metric::precision);
}

Estimate gfnr_from_phi(const std::vector<double>& phi, const std::vector<double>& scores,
                       EstimatorKind kind) {
    std::vector<double> num(phi.size()), den(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        num[i] = (1.0 - scores[i]) * phi[i];
        den[i] = phi[i];
    }
    return ratio_of_means(num, den, kind, Metric::gfnr);
}

Estimate gfpr_from_phi(const std::vector<double>& phi, const std::vector<double>& scores,
                       EstimatorKind kind) {
    std::vector<double> num(phi.size()), den(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        num[i] = scores[i] * (1.0 - phi[i]);
        den[i] = 1.0 - phi[i];
    }
    return ratio_of_means(num, den, kind, Metric::gfpr);
}

} // namespace

Estimate dr_tpr(const OracleDataset& dataset, const NuisanceSet& nuisances,
                const std::vector<std::uint8_t>& predicted_labels, double clip,
                PositivityPolicy policy) {
    if (predicted_labels.size() != dataset.size())
        throw AlignmentError("predicted labels are not aligned with the dataset");
    std::vector<double> phi = pseudo_outcomes(dataset, nuisances, clip, policy);
    return tpr_from_phi(phi, predicted_labels, EstimatorKind::dr);
}

Estimate dr_fpr(const OracleDataset& dataset, const NuisanceSet& nuisances,
                const std::vector<std::uint8_t>& predicted_labels, double clip,
                PositivityPolicy policy) {
    if (predicted_labels.size() != dataset.size())
        throw AlignmentError("predicted labels are not aligned with the dataset");
    std::vector<double> phi = pseudo_outcomes(dataset, nuisances, clip, policy);
    return fpr_from_phi(phi, predicted_labels, EstimatorKind::dr);
}

Estimate dr_precision(const OracleDataset& dataset, const NuisanceSet& nuisances,
                      const std::vector<std::uint8_t>& predicted_labels, double clip,
                      PositivityPolicy policy) {
    if (predicted_labels.size() != dataset.size())
        throw AlignmentError("predicted labels are not aligned with the dataset");
    std::vector<double> phi = pseudo_outcomes(dataset, nuisances, clip, policy);
    auto est = precision_from_phi(phi, predicted_labels, EstimatorKind::dr);
    if (!est) throw UndefinedMetricError("precision undefined: no predicted positives");
    return *est;
}

std::optional<Estimate> dr_calibration_bin(const OracleDataset& dataset,
                                           const NuisanceSet& nuisances,
                                           const std::vector<double>& scores, double r1, double r2,
                                           double clip, PositivityPolicy policy) {
    if (scores.size() != dataset.size())
        throw AlignmentError("scores are not aligned with the dataset");
    if (!(r1 < r2)) throw ParameterError("calibration bin requires r1 < r2");
    std::vector<double> phi = pseudo_outcomes(dataset, nuisances, clip, policy);
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < scores.size(); ++i)
        if (scores[i] >= r1 && scores[i] <= r2) rows.push_back(i);
    if (rows.empty()) return std::nullopt;
    return conditional_mean(phi, rows, EstimatorKind::dr, Metric::calibration_bin);
}

std::string to_string(EvalMode mode) {
    switch (mode) {
        case EvalMode::observational: return "observational";
        case EvalMode::control: return "control";
        case EvalMode::dr: return "dr";
        case EvalMode::oracle: return "oracle";
    }
    return "unknown";
}

EvalMode eval_mode_from_string(const std::string& name) {
    for (EvalMode mode :
         {EvalMode::observational, EvalMode::control, EvalMode::dr, EvalMode::oracle}) {
        if (to_string(mode) == name) return mode;
    }
    throw ParameterError("unknown evaluation mode: " + name);
}

ModeContext mode_context(EvalMode mode, const OracleDataset& dataset,
                         const NuisanceSet* nuisances, double clip, PositivityPolicy policy) {
    ModeContext ctx;
    switch (mode) {
        case EvalMode::observational: {
            ctx.rows = all_rows(dataset.size());
            ctx.phi.assign(dataset.y.begin(), dataset.y.end());
            ctx.kind = EstimatorKind::observational;
            break;
        }
        case EvalMode::control: {
            for (std::size_t i = 0; i < dataset.size(); ++i)
                if (dataset.t[i] == 0) ctx.rows.push_back(i);
            if (ctx.rows.empty())
                throw DataError("control mode requires a non-empty control subset");
            ctx.phi.reserve(ctx.rows.size());
            for (std::size_t r : ctx.rows) ctx.phi.push_back(dataset.y[r]);
            ctx.kind = EstimatorKind::control;
            break;
        }
        case EvalMode::dr: {
            if (nuisances == nullptr) throw ParameterError("dr mode requires nuisances");
            ctx.rows = all_rows(dataset.size());
            ctx.phi = pseudo_outcomes(dataset, *nuisances, clip, policy);
            ctx.kind = EstimatorKind::dr;
            break;
        }
        case EvalMode::oracle: {
            if (dataset.y0.size() != dataset.size())
                throw DataError("oracle mode requires the y0 column");
            ctx.rows = all_rows(dataset.size());
            ctx.phi.assign(dataset.y0.begin(), dataset.y0.end());
            ctx.kind = EstimatorKind::oracle;
            break;
        }
    }
    return ctx;
}

namespace {

template <typename T>
std::vector<T> select(const std::vector<T>& values, const std::vector<std::size_t>& rows) {
    std::vector<T> out;
    out.reserve(rows.size());
    for (std::size_t r : rows) out.push_back(values[r]);
    return out;
}

} // namespace

Estimate mode_base_rate(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
                        double clip, PositivityPolicy policy) {
    ModeContext ctx = mode_context(mode, dataset, nuisances, clip, policy);
    Estimate e = mean_estimate(ctx.phi, ctx.kind, Metric::base_rate);
    return e;
}

Estimate mode_tpr(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
                  const std::vector<std::uint8_t>& predicted_labels, double clip,
                  PositivityPolicy policy) {
    if (predicted_labels.size() != dataset.size())
        throw AlignmentError("predicted labels are not aligned with the dataset");
    ModeContext ctx = mode_context(mode, dataset, nuisances, clip, policy);
    return tpr_from_phi(ctx.phi, select(predicted_labels, ctx.rows), ctx.kind);
}

Estimate mode_fpr(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
                  const std::vector<std::uint8_t>& predicted_labels, double clip,
                  PositivityPolicy policy) {
    if (predicted_labels.size() != dataset.size())
        throw AlignmentError("predicted labels are not aligned with the dataset");
    ModeContext ctx = mode_context(mode, dataset, nuisances, clip, policy);
    return fpr_from_phi(ctx.phi, select(predicted_labels, ctx.rows), ctx.kind);
}

std::optional<Estimate> mode_precision(EvalMode mode, const OracleDataset& dataset,
                                       const NuisanceSet* nuisances,
                                       const std::vector<std::uint8_t>& predicted_labels,
                                       double clip, PositivityPolicy policy) {
    if (predicted_labels.size() != dataset.size())
        throw AlignmentError("predicted labels are not aligned with the dataset");
    ModeContext ctx = mode_context(mode, dataset, nuisances, clip, policy);
    return precision_from_phi(ctx.phi, select(predicted_labels, ctx.rows), ctx.kind);
}

std::optional<Estimate> mode_calibration_bin(EvalMode mode, const OracleDataset& dataset,
                                             const NuisanceSet* nuisances,
                                             const std::vector<double>& scores, double r1,
                                             double r2, double clip, PositivityPolicy policy) {
    if (scores.size() != dataset.size())
        throw AlignmentError("scores are not aligned with the dataset");
    if (!(r1 < r2)) throw ParameterError("calibration bin requires r1 < r2");
    ModeContext ctx = mode_context(mode, dataset, nuisances, clip, policy);
    std::vector<std::size_t> in_bin; // indices into ctx.phi
    for (std::size_t j = 0; j < ctx.rows.size(); ++j) {
        double s = scores[ctx.rows[j]];
        if (s >= r1 && s <= r2) in_bin.push_back(j);
    }
    if (in_bin.empty()) return std::nullopt;
    return conditional_mean(ctx.phi, in_bin, ctx.kind, Metric::calibration_bin);
}

Estimate mode_gfnr(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
                   const std::vector<double>& scores, double clip, PositivityPolicy policy) {
    if (scores.size() != dataset.size())
        throw AlignmentError("scores are not aligned with the dataset");
    ModeContext ctx = mode_context(mode, dataset, nuisances, clip, policy);
    return gfnr_from_phi(ctx.phi, select(scores, ctx.rows), ctx.kind);
}

Estimate mode_gfpr(EvalMode mode, const OracleDataset& dataset, const NuisanceSet* nuisances,
                   const std::vector<double>& scores, double clip, PositivityPolicy policy) {
    if (scores.size() != dataset.size())
        throw AlignmentError("scores are not aligned with the dataset");
    ModeContext ctx = mode_context(mode, dataset, nuisances, clip, policy);
    return gfpr_from_phi(ctx.phi, select(scores, ctx.rows), ctx.kind);
}

} // namespace cfeval
