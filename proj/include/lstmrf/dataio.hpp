#pragma once

#include "lstmrf/matrix.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lstmrf {

/// Date-ordered observations of one target variable plus optional named
/// exogenous columns of equal length.
struct TimeSeries {
    std::string name;                         // target column name
    std::vector<std::string> timestamps;      // ISO-8601, non-decreasing
    std::vector<double> target;
    std::vector<std::string> exo_names;
    std::vector<std::vector<double>> exogenous; // exogenous[j][i]: column j, row i

    std::size_t length() const { return target.size(); }
};

struct LoadReport {
    std::size_t rows_dropped = 0;        // rows removed for missing/malformed cells
    std::size_t duplicate_timestamps = 0; // ties kept, surfaced as a warning
};

/// Reads a CSV file, drops rows with missing cells, sorts by the date column
/// (stable, so duplicate dates keep file order) and returns the series.
/// Dates must be ISO-8601: YYYY-MM-DD with an optional time suffix.
TimeSeries load_series(const std::string& path, const std::string& target_column,
                       const std::string& date_column,
                       const std::vector<std::string>& exo_columns,
                       LoadReport* report = nullptr);

/// Z-score parameters. Population convention: sigma divides by N.
struct NormalizationParams {
    double mu = 0.0;
    double sigma = 1.0;

    double normalize(double v) const { return (v - mu) / sigma; }
    double denormalize(double v) const { return v * sigma + mu; }
};

/// Mean and population standard deviation of `values`. Throws on constant
/// input (sigma would be zero) or fewer than 2 values.
NormalizationParams fit_normalizer(std::span<const double> values);
NormalizationParams fit_normalizer(const TimeSeries& series);

std::vector<double> apply_normalizer(std::span<const double> values,
                                     const NormalizationParams& params);

/// One NormalizationParams per exogenous column. A constant column gets
/// sigma = 1 so it normalizes to all zeros instead of failing.
std::vector<NormalizationParams> fit_exo_normalizers(const TimeSeries& series);

/// Sliding-window samples. Row i of `inputs` is the normalized values at
/// source indices [i, i+L); the label is the value at index i+L, stored in
/// both normalized and original scale. exo_rows, when present, holds the
/// normalized exogenous values at the label's timestamp.
struct WindowedDataset {
    DataMatrix inputs;
    std::vector<double> labels_norm;
    std::vector<double> labels_orig;
    DataMatrix exo_rows;
    std::vector<std::string> exo_names;
    std::size_t window_len = 0;
    NormalizationParams target_norm; // params the inputs were normalized with

    std::size_t size() const { return inputs.rows; }
    bool has_exogenous() const { return exo_rows.cols > 0; }

    WindowedDataset slice(std::size_t begin, std::size_t end) const;
};

WindowedDataset make_windows(const TimeSeries& series, std::size_t window_len,
                             const NormalizationParams& target_params,
                             const std::vector<NormalizationParams>& exo_params = {});

/// Ordered split: first floor(fraction * n) samples to train, rest to test.
/// Throws when either partition would be empty.
std::pair<WindowedDataset, WindowedDataset> split_ordered(const WindowedDataset& dataset,
                                                          double train_fraction);

/// Debug export: columns w0..w{L-1}, label_norm, label_orig.
void export_windows_csv(const WindowedDataset& dataset, const std::string& path);

} // namespace lstmrf
