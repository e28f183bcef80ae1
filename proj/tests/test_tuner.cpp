#include "lstmrf/tuner.hpp"

#include "lstmrf/errors.hpp"
#include "lstmrf/lstm.hpp"
#include "lstmrf/metrics.hpp"
#include "lstmrf/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

using namespace lstmrf;

namespace {

TimeSeries sine_series(std::size_t length) {
    TimeSeries series;
    series.name = "target";
    for (std::size_t i = 0; i < length; ++i) {
        series.timestamps.push_back("2021-01-01");
        series.target.push_back(std::sin(0.3 * static_cast<double>(i)) +
                                0.1 * std::sin(1.7 * static_cast<double>(i)));
    }
    return series;
}

/// Small sweep that finishes in milliseconds.
LstmGrid tiny_lstm_grid() {
    LstmGrid grid;
    grid.hidden_sizes = {3, 4};
    grid.num_layers = {1};
    grid.learning_rates = {0.05};
    grid.sequence_lens = {5, 8};
    return grid;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / name).string()) {}
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("default grids enumerate the documented combination counts") {
    CHECK(LstmGrid{}.combinations() == 16);
    CHECK(RfGrid{}.combinations() == 8);

    LstmGrid empty;
    empty.hidden_sizes.clear();
    CHECK_THROWS_AS(empty.validate(), ValidationError);
    RfGrid empty_rf;
    empty_rf.min_samples_splits.clear();
    CHECK_THROWS_AS(empty_rf.validate(), ValidationError);
}

TEST_CASE("lstm sweep scores the target sequence alone, ignoring exogenous columns") {
    TimeSeries plain = sine_series(80);
    TimeSeries with_exo = plain;
    with_exo.exo_names = {"aux"};
    with_exo.exogenous = {std::vector<double>(80, 0.0)};
    for (std::size_t i = 0; i < 80; ++i) with_exo.exogenous[0][i] = static_cast<double>(i);

    std::vector<LstmTuneRow> a = grid_search_lstm(plain, tiny_lstm_grid(), 3, 0.8, 7);
    std::vector<LstmTuneRow> b = grid_search_lstm(with_exo, tiny_lstm_grid(), 3, 0.8, 7);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(b[i].status == "ok");
        CHECK(a[i].combo == b[i].combo);
        CHECK(a[i].score == b[i].score); // bitwise: exo columns play no part
    }
}

TEST_CASE("lstm sweep visits every combination in nested order with derived seeds") {
    TimeSeries series = sine_series(80);
    std::vector<LstmTuneRow> rows = grid_search_lstm(series, tiny_lstm_grid(), 4, 0.8, 99);
    REQUIRE(rows.size() == 4);

    // Recover enumeration order by combo index: hidden outermost,
    // sequence_len innermost.
    std::vector<LstmTuneRow> by_combo(rows);
    std::sort(by_combo.begin(), by_combo.end(),
              [](const LstmTuneRow& a, const LstmTuneRow& b) { return a.combo < b.combo; });
    CHECK(by_combo[0].hidden_size == 3);
    CHECK(by_combo[0].sequence_len == 5);
    CHECK(by_combo[1].hidden_size == 3);
    CHECK(by_combo[1].sequence_len == 8);
    CHECK(by_combo[2].hidden_size == 4);
    CHECK(by_combo[2].sequence_len == 5);
    CHECK(by_combo[3].hidden_size == 4);
    CHECK(by_combo[3].sequence_len == 8);
    for (const auto& row : by_combo) {
        CHECK(row.seed == Rng::derive(99, row.combo));
        CHECK(row.status == "ok");
        CHECK(row.score.has_value());
    }

    // Rows come back ranked: scores descending, rank counting from 1.
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].rank == i + 1);
        if (i > 0) CHECK(*rows[i - 1].score >= *rows[i].score);
    }
}

TEST_CASE("the winning combination refits standalone to the identical score") {
    TimeSeries series = sine_series(80);
    std::vector<LstmTuneRow> rows = grid_search_lstm(series, tiny_lstm_grid(), 4, 0.8, 1234);
    const LstmTuneRow& best = rows.front();
    REQUIRE(best.score.has_value());

    NormalizationParams norm = fit_normalizer(series);
    WindowedDataset windows = make_windows(series, best.sequence_len, norm);
    auto [train_set, test_set] = split_ordered(windows, 0.8);
    LstmConfig config;
    config.hidden_size = best.hidden_size;
    config.num_layers = best.num_layers;
    config.learning_rate = best.learning_rate;
    config.epochs = 4;
    config.seed = best.seed;
    LstmParameters params = train_lstm(config, train_set);
    std::vector<double> predictions;
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        predictions.push_back(norm.denormalize(forward(params, test_set.inputs.row(i))));
    }
    EvalReport eval = evaluate(test_set.labels_orig, predictions);
    REQUIRE(eval.pearson.has_value());
    CHECK(*eval.pearson == *best.score); // bitwise identical
}

TEST_CASE("sweeps are deterministic across reruns and thread counts") {
    TimeSeries series = sine_series(70);
    LstmGrid grid = tiny_lstm_grid();
    std::vector<LstmTuneRow> a = grid_search_lstm(series, grid, 3, 0.8, 7);
    std::vector<LstmTuneRow> b = grid_search_lstm(series, grid, 3, 0.8, 7);
    std::vector<LstmTuneRow> c = grid_search_lstm(series, grid, 3, 0.8, 7, 2);
    REQUIRE(a.size() == b.size());
    REQUIRE(a.size() == c.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].combo == b[i].combo);
        CHECK(a[i].score == b[i].score);
        CHECK(a[i].combo == c[i].combo);
        CHECK(a[i].score == c[i].score);
    }

    TempFile f1("tuner_csv_a.csv"), f2("tuner_csv_b.csv");
    write_lstm_grid_csv(a, f1.path);
    write_lstm_grid_csv(b, f2.path);
    CHECK(slurp(f1.path) == slurp(f2.path));

    // A different master seed reaches different scores.
    std::vector<LstmTuneRow> d = grid_search_lstm(series, grid, 3, 0.8, 8);
    bool any_diff = false;
    for (const auto& row : d) {
        for (const auto& other : a) {
            if (other.combo == row.combo && other.score != row.score) any_diff = true;
        }
    }
    CHECK(any_diff);
}

TEST_CASE("a combination that cannot run is reported failed and ranked last") {
    TimeSeries series = sine_series(60);
    LstmGrid grid;
    grid.hidden_sizes = {3};
    grid.num_layers = {1};
    grid.learning_rates = {0.05};
    grid.sequence_lens = {5, 200}; // 200 > series length: windowing must fail

    std::vector<LstmTuneRow> rows = grid_search_lstm(series, grid, 3, 0.8, 5);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].status == "ok");
    CHECK(rows[0].score.has_value());
    CHECK(rows[1].status == "failed");
    CHECK_FALSE(rows[1].score.has_value());
    CHECK(rows[1].sequence_len == 200);
    CHECK(!rows[1].detail.empty());
    CHECK(rows[1].rank == 2);

    TempFile csv("tuner_failed_row.csv");
    write_lstm_grid_csv(rows, csv.path);
    std::string text = slurp(csv.path);
    CHECK(text.find("rank,hidden_size,num_layers,learning_rate,sequence_len,seed,pearson,status,"
                     "detail\n") == 0);
    CHECK(text.find("failed") != std::string::npos);
}

TEST_CASE("forest sweep covers the default grid on a feature matrix") {
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> value(-1.0, 1.0);
    DataMatrix features(60, 3);
    std::vector<double> labels(60);
    for (std::size_t i = 0; i < 60; ++i) {
        for (std::size_t j = 0; j < 3; ++j) features.at(i, j) = value(gen);
        labels[i] = features.at(i, 0) - 2.0 * features.at(i, 2) + 0.05 * value(gen);
    }

    RfGrid grid; // default: 8 combinations
    std::vector<RfTuneRow> rows = grid_search_rf(features, labels, grid, 0.8, 31);
    REQUIRE(rows.size() == 8);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].rank == i + 1);
        CHECK(rows[i].status == "ok");
        REQUIRE(rows[i].score.has_value());
        if (i > 0) CHECK(*rows[i - 1].score >= *rows[i].score);
        CHECK(rows[i].seed == Rng::derive(31, 1'000'000 + rows[i].combo));
    }

    // Standalone refit of the winner reproduces its score bit-exactly.
    const RfTuneRow& best = rows.front();
    std::size_t train_count = static_cast<std::size_t>(0.8 * 60.0);
    DataMatrix train_x = features.slice_rows(0, train_count);
    DataMatrix test_x = features.slice_rows(train_count, 60);
    std::vector<double> train_y(labels.begin(), labels.begin() + 48);
    std::vector<double> test_y(labels.begin() + 48, labels.end());
    ForestConfig config;
    config.num_trees = best.num_trees;
    config.max_depth = best.max_depth;
    config.min_samples_split = best.min_samples_split;
    config.seed = best.seed;
    ForestModel model = fit_forest(train_x, train_y, config);
    EvalReport eval = evaluate(test_y, predict_regression(model, test_x));
    REQUIRE(eval.r2.has_value());
    CHECK(*eval.r2 == *best.score);

    TempFile csv("tuner_rf_grid.csv");
    write_rf_grid_csv(rows, csv.path);
    std::string text = slurp(csv.path);
    CHECK(text.find("rank,n_estimators,max_depth,min_samples_split,seed,r2,status,detail\n") == 0);
    CHECK(text.find(",none,") != std::string::npos); // unbounded depth spelled out

    std::vector<double> short_labels(10, 0.0);
    CHECK_THROWS_AS(grid_search_rf(features, short_labels, grid, 0.8, 31), ValidationError);
}
