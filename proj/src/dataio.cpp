#include "lstmrf/dataio.hpp"

#include "lstmrf/csv.hpp"
#include "lstmrf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace lstmrf {

namespace {

// Parses YYYY-MM-DD with an optional "T.." or " .." HH:MM[:SS] suffix into a
// sortable integer key (seconds since an arbitrary epoch, proleptic
// Gregorian). Throws ValidationError on anything else.
long long parse_iso_date(const std::string& text) {
    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    const char* s = text.c_str();
    int consumed = 0;
    if (std::sscanf(s, "%4d-%2d-%2d%n", &year, &month, &day, &consumed) != 3 || consumed != 10) {
        throw ValidationError("unparseable date: '" + text + "' (expected YYYY-MM-DD)");
    }
    if (s[consumed] != '\0') {
        char sep = s[consumed];
        if (sep != 'T' && sep != ' ') {
            throw ValidationError("unparseable date: '" + text + "'");
        }
        int tail = 0;
        int fields = std::sscanf(s + consumed + 1, "%2d:%2d:%2d%n", &hour, &minute, &second, &tail);
        if (fields < 2) {
            throw ValidationError("unparseable time in date: '" + text + "'");
        }
        int expect = (fields == 2) ? 5 : 8;
        if (fields == 2) {
            // %n is only set after a full match; re-scan HH:MM alone.
            std::sscanf(s + consumed + 1, "%2d:%2d%n", &hour, &minute, &tail);
        }
        if (tail != expect || s[consumed + 1 + tail] != '\0') {
            throw ValidationError("unparseable time in date: '" + text + "'");
        }
    }
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60) {
        throw ValidationError("date out of range: '" + text + "'");
    }
    // Days since civil epoch (Howard Hinnant's algorithm).
    int y = year - (month <= 2);
    int era = (y >= 0 ? y : y - 399) / 400;
    unsigned yoe = static_cast<unsigned>(y - era * 400);
    unsigned doy = (153u * static_cast<unsigned>(month + (month > 2 ? -3 : 9)) + 2) / 5 +
                   static_cast<unsigned>(day) - 1;
    unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    long long days = static_cast<long long>(era) * 146097 + static_cast<long long>(doe) - 719468;
    return days * 86400 + hour * 3600 + minute * 60 + second;
}

} // namespace

TimeSeries load_series(const std::string& path, const std::string& target_column,
                       const std::string& date_column,
                       const std::vector<std::string>& exo_columns, LoadReport* report) {
    csv::Table table = csv::read_file(path);

    int date_idx = table.column_index(date_column);
    if (date_idx < 0) throw ValidationError("unknown date column: '" + date_column + "'");
    int target_idx = table.column_index(target_column);
    if (target_idx < 0) throw ValidationError("unknown target column: '" + target_column + "'");
    std::vector<int> exo_idx;
    for (const auto& name : exo_columns) {
        int idx = table.column_index(name);
        if (idx < 0) throw ValidationError("unknown exogenous column: '" + name + "'");
        exo_idx.push_back(idx);
    }

    struct Row {
        long long key;
        std::string stamp;
        double target;
        std::vector<double> exo;
    };
    std::vector<Row> rows;
    std::size_t dropped = 0;

    std::size_t max_idx = static_cast<std::size_t>(std::max(date_idx, target_idx));
    for (int idx : exo_idx) max_idx = std::max(max_idx, static_cast<std::size_t>(idx));

    for (const auto& cells : table.rows) {
        if (cells.size() <= max_idx) {
            ++dropped;
            continue;
        }
        const std::string& stamp = cells[static_cast<std::size_t>(date_idx)];
        if (csv::is_missing(stamp)) {
            ++dropped;
            continue;
        }
        Row row;
        bool missing = false;
        const std::string& target_cell = cells[static_cast<std::size_t>(target_idx)];
        if (csv::is_missing(target_cell) || !csv::parse_double(target_cell, row.target)) {
            missing = true;
        }
        for (int idx : exo_idx) {
            double v = 0.0;
            const std::string& cell = cells[static_cast<std::size_t>(idx)];
            if (csv::is_missing(cell) || !csv::parse_double(cell, v)) {
                missing = true;
                break;
            }
            row.exo.push_back(v);
        }
        if (missing) {
            ++dropped;
            continue;
        }
        row.key = parse_iso_date(stamp); // throws on malformed dates
        row.stamp = stamp;
        rows.push_back(std::move(row));
    }

    if (rows.size() < 2) {
        throw ValidationError("fewer than 2 valid rows in " + path);
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.key < b.key; });

    std::size_t duplicates = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].key == rows[i - 1].key) ++duplicates;
    }

    TimeSeries series;
    series.name = target_column;
    series.exo_names = exo_columns;
    series.exogenous.resize(exo_columns.size());
    series.timestamps.reserve(rows.size());
    series.target.reserve(rows.size());
    for (auto& row : rows) {
        series.timestamps.push_back(std::move(row.stamp));
        series.target.push_back(row.target);
        for (std::size_t j = 0; j < exo_idx.size(); ++j) {
            series.exogenous[j].push_back(row.exo[j]);
        }
    }

    if (report) {
        report->rows_dropped = dropped;
        report->duplicate_timestamps = duplicates;
    }
    return series;
}

NormalizationParams fit_normalizer(std::span<const double> values) {
    if (values.size() < 2) {
        throw ValidationError("normalizer needs at least 2 values");
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    double mu = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mu) * (v - mu);
    double sigma = std::sqrt(ss / static_cast<double>(values.size()));
    if (sigma == 0.0) {
        throw ValidationError("constant series: standard deviation is zero");
    }
    return {mu, sigma};
}

NormalizationParams fit_normalizer(const TimeSeries& series) {
    return fit_normalizer(std::span<const double>(series.target));
}

std::vector<double> apply_normalizer(std::span<const double> values,
                                     const NormalizationParams& params) {
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        out[i] = params.normalize(values[i]);
    }
    return out;
}

std::vector<NormalizationParams> fit_exo_normalizers(const TimeSeries& series) {
    std::vector<NormalizationParams> out;
    out.reserve(series.exogenous.size());
    for (const auto& column : series.exogenous) {
        double sum = std::accumulate(column.begin(), column.end(), 0.0);
        double mu = column.empty() ? 0.0 : sum / static_cast<double>(column.size());
        double ss = 0.0;
        for (double v : column) ss += (v - mu) * (v - mu);
        double sigma = column.empty() ? 1.0 : std::sqrt(ss / static_cast<double>(column.size()));
        if (sigma == 0.0) sigma = 1.0; // constant column normalizes to zeros
        out.push_back({mu, sigma});
    }
    return out;
}

WindowedDataset make_windows(const TimeSeries& series, std::size_t window_len,
                             const NormalizationParams& target_params,
                             const std::vector<NormalizationParams>& exo_params) {
    std::size_t total = series.length();
    if (window_len < 1) {
        throw ValidationError("window_len must be at least 1");
    }
    if (total <= window_len) {
        throw ValidationError("series length " + std::to_string(total) +
                              " must exceed window_len " + std::to_string(window_len));
    }
    bool with_exo = !series.exogenous.empty();
    if (with_exo && exo_params.size() != series.exogenous.size()) {
        throw ValidationError("exogenous normalizer count does not match column count");
    }

    std::size_t n = total - window_len;
    WindowedDataset ds;
    ds.window_len = window_len;
    ds.target_norm = target_params;
    ds.inputs = DataMatrix(n, window_len);
    ds.labels_norm.resize(n);
    ds.labels_orig.resize(n);
    if (with_exo) {
        ds.exo_rows = DataMatrix(n, series.exogenous.size());
        ds.exo_names = series.exo_names;
    }

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < window_len; ++k) {
            ds.inputs.at(i, k) = target_params.normalize(series.target[i + k]);
        }
        ds.labels_orig[i] = series.target[i + window_len];
        ds.labels_norm[i] = target_params.normalize(ds.labels_orig[i]);
        if (with_exo) {
            for (std::size_t j = 0; j < series.exogenous.size(); ++j) {
                ds.exo_rows.at(i, j) = exo_params[j].normalize(series.exogenous[j][i + window_len]);
            }
        }
    }
    return ds;
}

WindowedDataset WindowedDataset::slice(std::size_t begin, std::size_t end) const {
    WindowedDataset out;
    out.window_len = window_len;
    out.target_norm = target_norm;
    out.exo_names = exo_names;
    out.inputs = inputs.slice_rows(begin, end);
    out.labels_norm.assign(labels_norm.begin() + static_cast<std::ptrdiff_t>(begin),
                           labels_norm.begin() + static_cast<std::ptrdiff_t>(end));
    out.labels_orig.assign(labels_orig.begin() + static_cast<std::ptrdiff_t>(begin),
                           labels_orig.begin() + static_cast<std::ptrdiff_t>(end));
    if (exo_rows.cols > 0) {
        out.exo_rows = exo_rows.slice_rows(begin, end);
    }
    return out;
}

std::pair<WindowedDataset, WindowedDataset> split_ordered(const WindowedDataset& dataset,
                                                          double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ValidationError("train_fraction must lie strictly between 0 and 1");
    }
    std::size_t n = dataset.size();
    if (n == 0) {
        throw ValidationError("cannot split an empty dataset");
    }
    std::size_t n_train =
        static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
    if (n_train == 0 || n_train == n) {
        throw ValidationError("split produces an empty partition (n=" + std::to_string(n) +
                              ", fraction=" + std::to_string(train_fraction) + ")");
    }
    return {dataset.slice(0, n_train), dataset.slice(n_train, n)};
}

void export_windows_csv(const WindowedDataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write file: " + path);
    }
    std::vector<std::string> header;
    for (std::size_t k = 0; k < dataset.window_len; ++k) {
        header.push_back("w" + std::to_string(k));
    }
    header.emplace_back("label_norm");
    header.emplace_back("label_orig");
    out << csv::join_row(header);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        std::vector<std::string> cells;
        for (std::size_t k = 0; k < dataset.window_len; ++k) {
            cells.push_back(csv::format_double(dataset.inputs.at(i, k)));
        }
        cells.push_back(csv::format_double(dataset.labels_norm[i]));
        cells.push_back(csv::format_double(dataset.labels_orig[i]));
        out << csv::join_row(cells);
    }
}

} // namespace lstmrf
