#include "lstmrf/metrics.hpp"

#include "lstmrf/errors.hpp"

#include <cmath>
#include <string>

namespace lstmrf {

namespace {

/// Kahan-style compensated accumulator.
struct Accumulator {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        double y = v - carry;
        double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

bool is_constant(std::span<const double> values) {
    for (double v : values) {
        if (v != values[0]) return false;
    }
    return true;
}

} // namespace

EvalReport evaluate(std::span<const double> actual, std::span<const double> predicted) {
    if (actual.size() != predicted.size()) {
        throw ValidationError("evaluate: " + std::to_string(actual.size()) + " actual vs " +
                              std::to_string(predicted.size()) + " predicted values");
    }
    if (actual.empty()) {
        throw ValidationError("evaluate on empty sequences");
    }

    const auto n = static_cast<double>(actual.size());
    EvalReport report;
    report.n = actual.size();

    Accumulator sq_err, abs_err;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        double d = actual[i] - predicted[i];
        sq_err.add(d * d);
        abs_err.add(std::abs(d));
    }
    report.mse = sq_err.sum / n;
    report.mae = abs_err.sum / n;
    report.rmse = std::sqrt(report.mse);

    if (actual.size() < 2) return report;

    Accumulator sum_a, sum_p;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        sum_a.add(actual[i]);
        sum_p.add(predicted[i]);
    }
    double mean_a = sum_a.sum / n;
    double mean_p = sum_p.sum / n;

    Accumulator var_a, var_p, cov;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        double da = actual[i] - mean_a;
        double dp = predicted[i] - mean_p;
        var_a.add(da * da);
        var_p.add(dp * dp);
        cov.add(da * dp);
    }

    if (!is_constant(actual)) {
        report.r2 = 1.0 - sq_err.sum / var_a.sum;
    }
    if (!is_constant(actual) && !is_constant(predicted)) {
        report.pearson = cov.sum / std::sqrt(var_a.sum * var_p.sum);
    }
    return report;
}

} // namespace lstmrf
