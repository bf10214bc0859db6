#include "cfeval/common.hpp"

#include <algorithm>
#include <cmath>

namespace cfeval {

std::string to_string(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::plugin: return "plugin";
        case EstimatorKind::ipw: return "ipw";
        case EstimatorKind::dr: return "dr";
        case EstimatorKind::observational: return "observational";
        case EstimatorKind::control: return "control";
        case EstimatorKind::oracle: return "oracle";
    }
    return "unknown";
}

std::string to_string(Metric metric) {
    switch (metric) {
        case Metric::mean_y0: return "mean_y0";
        case Metric::tpr: return "tpr";
        case Metric::fpr: return "fpr";
        case Metric::precision: return "precision";
        case Metric::calibration_bin: return "calibration_bin";
        case Metric::gfnr: return "gfnr";
        case Metric::gfpr: return "gfpr";
        case Metric::base_rate: return "base_rate";
    }
    return "unknown";
}

EstimatorKind estimator_kind_from_string(const std::string& name) {
    for (EstimatorKind kind : {EstimatorKind::plugin, EstimatorKind::ipw, EstimatorKind::dr,
                               EstimatorKind::observational, EstimatorKind::control,
                               EstimatorKind::oracle}) {
        if (to_string(kind) == name) return kind;
    }
    throw ParameterError("unknown estimator kind: " + name);
}

Metric metric_from_string(const std::string& name) {
    for (Metric metric : {Metric::mean_y0, Metric::tpr, Metric::fpr, Metric::precision,
                          Metric::calibration_bin, Metric::gfnr, Metric::gfpr,
                          Metric::base_rate}) {
        if (to_string(metric) == name) return metric;
    }
    throw ParameterError("unknown metric: " + name);
}

double Estimate::clipped() const {
    if (std::isnan(value)) return value;
    return std::clamp(value, 0.0, 1.0);
}

Estimate make_estimate(double value, double std_error, std::size_t n_effective,
                       EstimatorKind kind, Metric metric) {
    Estimate e;
    e.value = value;
    e.std_error = std_error;
    e.ci_low = value - kZ95 * std_error;
    e.ci_high = value + kZ95 * std_error;
    e.n_effective = n_effective;
    e.kind = kind;
    e.metric = metric;
    return e;
}

} // namespace cfeval
