#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfeval {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid configuration or argument values (c outside [0,1], n == 0, bad threshold, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// Structurally unusable data: empty required subsets, degenerate label classes, bad files.
class DataError : public Error {
public:
    using Error::Error;
};

// Rows whose columns or lengths do not line up with what a model or estimator expects.
class AlignmentError : public Error {
public:
    using Error::Error;
};

// Optimizer did not reach the requested gradient tolerance.
class FitError : public Error {
public:
    FitError(const std::string& message, double gradient_norm)
        : Error(message), gradient_norm(gradient_norm) {}
    double gradient_norm;
};

// Complete separation: the unpenalized likelihood has no interior maximizer.
class SeparationError : public Error {
public:
    using Error::Error;
};

// Propensity estimates too close to 1 for control-arm reweighting.
class PositivityError : public Error {
public:
    PositivityError(const std::string& message, std::vector<std::size_t> rows)
        : Error(message), rows(std::move(rows)) {}
    std::vector<std::size_t> rows;
};

// Metric with an empty or degenerate conditioning set (zero denominator, no positives).
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

enum class EstimatorKind { plugin, ipw, dr, observational, control, oracle };
enum class Metric { mean_y0, tpr, fpr, precision, calibration_bin, gfnr, gfpr, base_rate };

std::string to_string(EstimatorKind kind);
std::string to_string(Metric metric);
EstimatorKind estimator_kind_from_string(const std::string& name);
Metric metric_from_string(const std::string& name);

// Paper's normal-approximation z for 95% intervals.
inline constexpr double kZ95 = 1.96;

struct Estimate {
    double value = std::numeric_limits<double>::quiet_NaN();
    double std_error = std::numeric_limits<double>::quiet_NaN();
    double ci_low = std::numeric_limits<double>::quiet_NaN();
    double ci_high = std::numeric_limits<double>::quiet_NaN();
    std::size_t n_effective = 0;
    EstimatorKind kind = EstimatorKind::dr;
    Metric metric = Metric::mean_y0;

    // DR point estimates may exit [0,1]; plotting uses this companion.
    double clipped() const;
};

Estimate make_estimate(double value, double std_error, std::size_t n_effective,
                       EstimatorKind kind, Metric metric);

} // namespace cfeval
