#include "lstmrf/tuner.hpp"

#include "lstmrf/csv.hpp"
#include "lstmrf/errors.hpp"
#include "lstmrf/lstm.hpp"
#include "lstmrf/metrics.hpp"
#include "lstmrf/parallel.hpp"
#include "lstmrf/rng.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

namespace lstmrf {

namespace {

// RF sub-seeds start here so the two sweeps draw from disjoint streams.
constexpr std::uint64_t kRfStreamBase = 1'000'000;

std::string sanitize(std::string text) {
    for (char& c : text) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return text;
}

/// Ranks rows in place: score descending, ties by combination index,
/// failures after all scored rows (by index).
template <typename Row>
void rank_rows(std::vector<Row>& rows) {
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
        if (a.score.has_value() && *a.score != *b.score) return *a.score > *b.score;
        return a.combo < b.combo;
    });
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].rank = i + 1;
}

} // namespace

std::size_t LstmGrid::combinations() const {
    return hidden_sizes.size() * num_layers.size() * learning_rates.size() *
           sequence_lens.size();
}

void LstmGrid::validate() const {
    if (hidden_sizes.empty() || num_layers.empty() || learning_rates.empty() ||
        sequence_lens.empty()) {
        throw ValidationError("every LSTM grid value set must be non-empty");
    }
}

std::size_t RfGrid::combinations() const {
    return num_trees.size() * max_depths.size() * min_samples_splits.size();
}

void RfGrid::validate() const {
    if (num_trees.empty() || max_depths.empty() || min_samples_splits.empty()) {
        throw ValidationError("every forest grid value set must be non-empty");
    }
}

std::vector<LstmTuneRow> grid_search_lstm(const TimeSeries& series, const LstmGrid& grid,
                                          int epochs, double train_fraction,
                                          std::uint64_t master_seed, int threads) {
    grid.validate();
    if (epochs < 1) throw ValidationError("tuning epochs must be >= 1");

    std::vector<LstmTuneRow> rows;
    for (int hidden : grid.hidden_sizes) {
        for (int layers : grid.num_layers) {
            for (double lr : grid.learning_rates) {
                for (std::size_t seq_len : grid.sequence_lens) {
                    LstmTuneRow row;
                    row.combo = rows.size();
                    row.hidden_size = hidden;
                    row.num_layers = layers;
                    row.learning_rate = lr;
                    row.sequence_len = seq_len;
                    row.seed = Rng::derive(master_seed, row.combo);
                    rows.push_back(row);
                }
            }
        }
    }

    // The sweep scores each combination on the target sequence alone;
    // exogenous columns belong to the forest stage and are dropped here so
    // the sweep works on any input series.
    TimeSeries target_only = series;
    target_only.exo_names.clear();
    target_only.exogenous.clear();

    NormalizationParams target_norm = fit_normalizer(target_only);
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        LstmTuneRow& row = rows[i];
        try {
            WindowedDataset windows = make_windows(target_only, row.sequence_len, target_norm);
            auto [train_set, test_set] = split_ordered(windows, train_fraction);

            LstmConfig config;
            config.hidden_size = row.hidden_size;
            config.num_layers = row.num_layers;
            config.learning_rate = row.learning_rate;
            config.epochs = epochs;
            config.seed = row.seed;
            LstmParameters params = train_lstm(config, train_set);

            std::vector<double> predictions;
            predictions.reserve(test_set.size());
            ForwardTrace trace;
            for (std::size_t w = 0; w < test_set.size(); ++w) {
                predictions.push_back(
                    target_norm.denormalize(forward(params, test_set.inputs.row(w), &trace)));
            }
            EvalReport eval = evaluate(test_set.labels_orig, predictions);
            if (!eval.pearson) {
                row.status = "failed";
                row.detail = "score undefined (constant sequence on the test partition)";
            } else {
                row.score = *eval.pearson;
            }
        } catch (const Error& e) {
            row.status = "failed";
            row.detail = e.what();
        }
    });

    rank_rows(rows);
    return rows;
}

std::vector<RfTuneRow> grid_search_rf(const DataMatrix& features,
                                      const std::vector<double>& labels, const RfGrid& grid,
                                      double train_fraction, std::uint64_t master_seed,
                                      int threads) {
    grid.validate();
    if (features.rows != labels.size()) {
        throw ValidationError("feature rows do not match label count");
    }

    std::vector<RfTuneRow> rows;
    for (int trees : grid.num_trees) {
        for (int depth : grid.max_depths) {
            for (int split : grid.min_samples_splits) {
                RfTuneRow row;
                row.combo = rows.size();
                row.num_trees = trees;
                row.max_depth = depth;
                row.min_samples_split = split;
                row.seed = Rng::derive(master_seed, kRfStreamBase + row.combo);
                rows.push_back(row);
            }
        }
    }

    std::size_t train_count = static_cast<std::size_t>(
        train_fraction * static_cast<double>(features.rows));
    if (train_count == 0 || train_count >= features.rows) {
        throw ValidationError("train fraction leaves an empty partition");
    }
    DataMatrix train_x = features.slice_rows(0, train_count);
    DataMatrix test_x = features.slice_rows(train_count, features.rows);
    std::vector<double> train_y(labels.begin(),
                                labels.begin() + static_cast<std::ptrdiff_t>(train_count));
    std::vector<double> test_y(labels.begin() + static_cast<std::ptrdiff_t>(train_count),
                               labels.end());

    parallel_for(rows.size(), threads, [&](std::size_t i) {
        RfTuneRow& row = rows[i];
        try {
            ForestConfig config;
            config.num_trees = row.num_trees;
            config.max_depth = row.max_depth;
            config.min_samples_split = row.min_samples_split;
            config.seed = row.seed;
            ForestModel model = fit_forest(train_x, train_y, config);
            std::vector<double> predictions = predict_regression(model, test_x);
            EvalReport eval = evaluate(test_y, predictions);
            if (!eval.r2) {
                row.status = "failed";
                row.detail = "score undefined (constant labels on the test partition)";
            } else {
                row.score = *eval.r2;
            }
        } catch (const Error& e) {
            row.status = "failed";
            row.detail = e.what();
        }
    });

    rank_rows(rows);
    return rows;
}

void write_lstm_grid_csv(const std::vector<LstmTuneRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "rank,hidden_size,num_layers,learning_rate,sequence_len,seed,pearson,status,detail\n";
    for (const auto& row : rows) {
        out << row.rank << "," << row.hidden_size << "," << row.num_layers << ","
            << csv::format_double(row.learning_rate) << "," << row.sequence_len << "," << row.seed
            << "," << (row.score ? csv::format_double(*row.score) : std::string()) << ","
            << row.status << "," << sanitize(row.detail) << "\n";
    }
    if (!out.good()) throw IoError("failed while writing " + path);
}

void write_rf_grid_csv(const std::vector<RfTuneRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "rank,n_estimators,max_depth,min_samples_split,seed,r2,status,detail\n";
    for (const auto& row : rows) {
        out << row.rank << "," << row.num_trees << ","
            << (row.max_depth == kUnbounded ? std::string("none") : std::to_string(row.max_depth))
            << "," << row.min_samples_split << "," << row.seed << ","
            << (row.score ? csv::format_double(*row.score) : std::string()) << "," << row.status
            << "," << sanitize(row.detail) << "\n";
    }
    if (!out.good()) throw IoError("failed while writing " + path);
}

} // namespace lstmrf
