#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace lstmrf {

/// Evaluation summary for one (actual, predicted) pair of sequences.
/// r2 and pearson are empty when mathematically undefined — fewer than two
/// samples, or a constant sequence making the relevant denominator zero —
/// so callers must decide what a degenerate partition means for them.
struct EvalReport {
    std::size_t n = 0;
    double mse = 0.0;
    double mae = 0.0;
    double rmse = 0.0;
    std::optional<double> r2;
    std::optional<double> pearson;
};

/// mse  = (1/N) sum (y - yhat)^2          mae = (1/N) sum |y - yhat|
/// r2   = 1 - sum (y - yhat)^2 / sum (y - ybar)^2,  ybar = mean of actuals
/// rho  = cov(y, yhat) / (sd(y) sd(yhat))
/// Sums use compensated accumulation so reference comparisons hold to 1e-10
/// on long sequences. Throws ValidationError on empty or mismatched input.
EvalReport evaluate(std::span<const double> actual, std::span<const double> predicted);

} // namespace lstmrf
