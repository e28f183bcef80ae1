/// Acceptance checks for the hybrid forecaster. Each numbered criterion
/// prints exactly one PASS/FAIL line; the process exits non-zero when any
/// criterion fails. Every expected number is either computed here by an
/// independent method (finite differences, exhaustive enumeration, a
/// two-pass reference implementation) or fixed by the library's documented
/// contracts.

#include "lstmrf/cli.hpp"
#include "lstmrf/commands.hpp"
#include "lstmrf/forest.hpp"
#include "lstmrf/hybrid.hpp"
#include "lstmrf/lstm.hpp"
#include "lstmrf/metrics.hpp"
#include "lstmrf/rng.hpp"
#include "lstmrf/serialize.hpp"
#include "lstmrf/synth.hpp"
#include "lstmrf/tuner.hpp"

#include "lstm_reference.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace lstmrf;
namespace fs = std::filesystem;

namespace {

/// Throws with a formatted detail message when a condition fails.
void check(bool condition, const std::string& detail) {
    if (!condition) throw std::runtime_error(detail);
}

std::string fmt(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6g", v);
    return buffer;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

fs::path g_work;

std::string work_path(const std::string& leaf) { return (g_work / leaf).string(); }

// --- criterion 1: gradient oracle --------------------------------------

using testref::scalar_view;

void criterion_gradients() {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        std::mt19937_64 gen(seed);
        auto pick = [&gen](int lo, int hi) {
            return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
        };
        LstmConfig config;
        config.hidden_size = pick(1, 8);
        config.num_layers = pick(1, 2);
        config.seed = gen();
        LstmParameters params = LstmParameters::init(config);

        std::size_t window_len = static_cast<std::size_t>(pick(1, 6));
        std::size_t batch = static_cast<std::size_t>(pick(1, 4));
        std::uniform_real_distribution<double> value(-1.5, 1.5);
        DataMatrix windows(batch, window_len);
        std::vector<double> targets(batch);
        for (std::size_t i = 0; i < batch; ++i) {
            for (std::size_t k = 0; k < window_len; ++k) windows.at(i, k) = value(gen);
            targets[i] = value(gen);
        }

        LstmGradients grads = backward(params, windows, targets);
        std::vector<double*> pv = scalar_view(params);
        std::vector<double*> gv = scalar_view(grads);

        // The difference quotient uses the independent long-double reference
        // loss: at the 1e-8 magnitude cutoff a double-precision oracle would
        // contribute ~1e-3 relative rounding noise all by itself.
        constexpr double eps = 1e-5;
        for (std::size_t j = 0; j < pv.size(); ++j) {
            double analytic = *gv[j];
            if (std::abs(analytic) <= 1e-8) continue;
            double saved = *pv[j];
            *pv[j] = saved + eps;
            long double up = testref::reference_loss(params, windows, targets);
            *pv[j] = saved - eps;
            long double down = testref::reference_loss(params, windows, targets);
            *pv[j] = saved;
            double fd = static_cast<double>((up - down) / (2.0L * eps));
            double rel = std::abs(analytic - fd) / std::max(std::abs(analytic), std::abs(fd));
            check(rel < 1e-4, "instance " + std::to_string(seed) + " parameter " +
                                  std::to_string(j) + ": analytic " + fmt(analytic) +
                                  " vs finite difference " + fmt(fd) + " (rel " + fmt(rel) + ")");
        }
    }
}

// --- criterion 2: closed-form cell identities ---------------------------

LstmLayerParams zero_layer(int hidden, int input) {
    LstmLayerParams layer;
    layer.hidden_size = hidden;
    layer.input_size = input;
    auto tensor = static_cast<std::size_t>(hidden) * static_cast<std::size_t>(hidden + input);
    for (auto* w : {&layer.w_forget, &layer.w_input, &layer.w_cell, &layer.w_output}) {
        w->assign(tensor, 0.0);
    }
    for (auto* b : {&layer.b_forget, &layer.b_input, &layer.b_cell, &layer.b_output}) {
        b->assign(static_cast<std::size_t>(hidden), 0.0);
    }
    return layer;
}

void criterion_cell_identities() {
    const int hidden = 4;
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> value(-2.0, 2.0);

    for (int trial = 0; trial < 100; ++trial) {
        double x = value(gen);
        std::span<const double> xs(&x, 1);

        // (a) all-zero parameters from a zero state: gates 1/2, cell empty.
        LstmLayerParams zeros = zero_layer(hidden, 1);
        GateCache cache;
        LstmState next = cell_step(zeros, xs, LstmState(hidden), &cache);
        for (int j = 0; j < hidden; ++j) {
            auto ju = static_cast<std::size_t>(j);
            check(cache.f[ju] == 0.5 && cache.i[ju] == 0.5 && cache.o[ju] == 0.5,
                  "zero-parameter gates expected exactly 1/2");
            check(next.cell[ju] == 0.0 && next.hidden[ju] == 0.0,
                  "zero-parameter state expected exactly 0");
        }

        // (b) zero weights with a carried cell: c' = c/2, h' = tanh(c/2)/2.
        LstmState prev(hidden);
        for (auto& c : prev.cell) c = value(gen);
        next = cell_step(zeros, xs, prev);
        for (int j = 0; j < hidden; ++j) {
            auto ju = static_cast<std::size_t>(j);
            check(std::abs(next.cell[ju] - 0.5 * prev.cell[ju]) < 1e-15,
                  "halved-cell identity violated");
            check(std::abs(next.hidden[ju] - 0.5 * std::tanh(0.5 * prev.cell[ju])) < 1e-15,
                  "halved-hidden identity violated");
        }

        // (c) forget bias 50: the forget gate is within 1e-20 of 1, so one
        // step keeps the cell up to that factor.
        LstmLayerParams memory = zero_layer(hidden, 1);
        memory.b_forget.assign(hidden, 50.0);
        GateCache mcache;
        next = cell_step(memory, xs, prev, &mcache);
        for (int j = 0; j < hidden; ++j) {
            auto ju = static_cast<std::size_t>(j);
            check(std::abs(1.0 - mcache.f[ju]) < 1e-20, "sigmoid(50) not within 1e-20 of 1");
            check(std::abs(next.cell[ju] - prev.cell[ju]) <= std::abs(prev.cell[ju]) * 1e-15,
                  "saturated forget gate should preserve the cell");
        }

        // (d) random parameters keep every gate inside its open interval.
        LstmConfig config;
        config.hidden_size = hidden;
        config.seed = static_cast<std::uint64_t>(trial) + 1;
        LstmParameters params = LstmParameters::init(config);
        GateCache rcache;
        cell_step(params.layers[0], xs, prev, &rcache);
        for (int j = 0; j < hidden; ++j) {
            auto ju = static_cast<std::size_t>(j);
            check(rcache.f[ju] > 0.0 && rcache.f[ju] < 1.0, "forget gate out of (0,1)");
            check(rcache.i[ju] > 0.0 && rcache.i[ju] < 1.0, "input gate out of (0,1)");
            check(rcache.o[ju] > 0.0 && rcache.o[ju] < 1.0, "output gate out of (0,1)");
            check(rcache.g[ju] > -1.0 && rcache.g[ju] < 1.0, "candidate out of (-1,1)");
            check(rcache.h[ju] > -1.0 && rcache.h[ju] < 1.0, "hidden out of (-1,1)");
        }
    }

    // (e) memory over a long horizon: saturated forget + shut input carry
    // the cell across 100 steps to 1e-8.
    std::uniform_real_distribution<double> small(-0.1, 0.1);
    LstmLayerParams layer = zero_layer(hidden, 1);
    for (auto* w : {&layer.w_forget, &layer.w_input, &layer.w_cell, &layer.w_output}) {
        for (double& v : *w) v = small(gen);
    }
    layer.b_forget.assign(hidden, 50.0);
    layer.b_input.assign(hidden, -50.0);
    LstmState state(hidden);
    std::vector<double> c0;
    for (auto& c : state.cell) {
        c = value(gen);
        c0.push_back(c);
    }
    for (int t = 0; t < 100; ++t) {
        double x = value(gen);
        state = cell_step(layer, std::span<const double>(&x, 1), state);
    }
    for (int j = 0; j < hidden; ++j) {
        auto ju = static_cast<std::size_t>(j);
        check(std::abs(state.cell[ju] - c0[ju]) < 1e-8,
              "cell drifted " + fmt(std::abs(state.cell[ju] - c0[ju])) + " over 100 steps");
    }
}

// --- criterion 3: split oracle ------------------------------------------

double subset_sse(std::span<const double> labels, const std::vector<std::size_t>& subset) {
    double mean = 0.0;
    for (std::size_t idx : subset) mean += labels[idx];
    mean /= static_cast<double>(subset.size());
    double sse = 0.0;
    for (std::size_t idx : subset) {
        double d = labels[idx] - mean;
        sse += d * d;
    }
    return sse;
}

void criterion_split_oracle() {
    std::mt19937_64 gen(777);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t n = 2 + gen() % 19;
        std::size_t d = 1 + gen() % 4;
        std::uniform_real_distribution<double> value(-5.0, 5.0);
        DataMatrix features(n, d);
        std::vector<double> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < d; ++j) features.at(i, j) = value(gen);
            labels[i] = value(gen);
        }
        std::vector<std::size_t> indices(n);
        std::iota(indices.begin(), indices.end(), std::size_t{0});
        std::vector<std::size_t> candidates(d);
        std::iota(candidates.begin(), candidates.end(), std::size_t{0});

        // Exhaustive reference: every feature, every midpoint, two-pass SSE.
        bool found = false;
        int best_feature = -1;
        double best_threshold = 0.0, best_decrease = 0.0;
        double parent = subset_sse(labels, indices);
        for (std::size_t f = 0; f < d; ++f) {
            std::vector<double> values;
            for (std::size_t i = 0; i < n; ++i) values.push_back(features.at(i, f));
            std::sort(values.begin(), values.end());
            values.erase(std::unique(values.begin(), values.end()), values.end());
            for (std::size_t k = 0; k + 1 < values.size(); ++k) {
                double threshold = 0.5 * (values[k] + values[k + 1]);
                std::vector<std::size_t> left, right;
                for (std::size_t i = 0; i < n; ++i) {
                    (features.at(i, f) <= threshold ? left : right).push_back(i);
                }
                if (left.empty() || right.empty()) continue;
                double decrease =
                    (parent - subset_sse(labels, left) - subset_sse(labels, right)) /
                    static_cast<double>(n);
                if (decrease > best_decrease) {
                    found = true;
                    best_feature = static_cast<int>(f);
                    best_threshold = threshold;
                    best_decrease = decrease;
                }
            }
        }

        SplitResult got = best_split(features, labels, indices, candidates, TreeTask::Regression);
        check(got.found == found, "trial " + std::to_string(trial) + ": found mismatch");
        if (found) {
            check(got.feature == best_feature, "trial " + std::to_string(trial) +
                                                   ": feature " + std::to_string(got.feature) +
                                                   " vs " + std::to_string(best_feature));
            check(got.threshold == best_threshold,
                  "trial " + std::to_string(trial) + ": threshold " + fmt(got.threshold) +
                      " vs " + fmt(best_threshold));
            double rel = std::abs(got.decrease - best_decrease) /
                         std::max(std::abs(best_decrease), 1e-300);
            check(rel < 1e-9, "trial " + std::to_string(trial) + ": decrease " +
                                  fmt(got.decrease) + " vs " + fmt(best_decrease));
        }
    }

    // Exact tie cases: duplicate column -> lowest feature index wins; a
    // symmetric label pattern -> lowest threshold wins.
    {
        DataMatrix features(4, 2);
        std::vector<double> labels{0.0, 1.0, 5.0, 6.0};
        for (std::size_t i = 0; i < 4; ++i) {
            features.at(i, 0) = static_cast<double>(i);
            features.at(i, 1) = static_cast<double>(i);
        }
        std::vector<std::size_t> idx{0, 1, 2, 3};
        std::vector<std::size_t> cand{0, 1};
        SplitResult got = best_split(features, labels, idx, cand, TreeTask::Regression);
        check(got.found && got.feature == 0, "duplicate-column tie must pick feature 0");
    }
    {
        DataMatrix features(3, 1);
        for (std::size_t i = 0; i < 3; ++i) features.at(i, 0) = static_cast<double>(i);
        std::vector<double> labels{0.0, 1.0, 0.0};
        std::vector<std::size_t> idx{0, 1, 2};
        std::vector<std::size_t> cand{0};
        SplitResult got = best_split(features, labels, idx, cand, TreeTask::Regression);
        check(got.found && got.threshold == 0.5, "threshold tie must pick the lower midpoint");
    }
}

// --- criterion 4: perfect fit -------------------------------------------

void criterion_perfect_fit() {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> value(-10.0, 10.0);
    for (int trial = 0; trial < 20; ++trial) {
        DataMatrix features(50, 3);
        std::vector<double> labels(50);
        for (std::size_t i = 0; i < 50; ++i) {
            for (std::size_t j = 0; j < 3; ++j) features.at(i, j) = value(gen);
            labels[i] = value(gen);
        }
        ForestConfig config;
        config.num_trees = 1; // one tree keeps the ensemble mean bitwise exact
        config.bootstrap = false;
        config.max_features = kAllFeatures;
        config.min_samples_split = 2;
        config.max_depth = kUnbounded;
        config.seed = static_cast<std::uint64_t>(trial);
        ForestModel model = fit_forest(features, labels, config);

        double mse = 0.0;
        for (std::size_t i = 0; i < 50; ++i) {
            double diff = predict_regression(model, features.row(i)) - labels[i];
            mse += diff * diff;
        }
        check(mse == 0.0, "trial " + std::to_string(trial) + ": training MSE " + fmt(mse) +
                              " (expected exactly 0)");
    }
}

// --- criterion 5: ensemble invariants ------------------------------------

void criterion_ensemble_invariants() {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t n = 40 + gen() % 41; // 40..80 samples
        std::uniform_real_distribution<double> value(-2.0, 2.0);
        DataMatrix features(n, 4);
        std::vector<double> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < 4; ++j) features.at(i, j) = value(gen);
            labels[i] = 2.0 * features.at(i, 0) - features.at(i, 2) + 0.1 * value(gen);
        }
        ForestConfig config;
        config.num_trees = 10 + static_cast<int>(gen() % 41); // <= 50 trees
        config.seed = static_cast<std::uint64_t>(trial) + 100;
        ForestModel model = fit_forest(features, labels, config);

        // Range bound, well outside the training box.
        double lo = *std::min_element(labels.begin(), labels.end());
        double hi = *std::max_element(labels.begin(), labels.end());
        for (int probe = 0; probe < 50; ++probe) {
            std::vector<double> x(4);
            std::uniform_real_distribution<double> wide(-8.0, 8.0);
            for (auto& v : x) v = wide(gen);
            double p = predict_regression(model, x);
            check(p >= lo && p <= hi, "prediction " + fmt(p) + " escaped label range [" +
                                          fmt(lo) + ", " + fmt(hi) + "]");
        }

        // Importances: non-negative, sum 1 within 1e-12.
        double sum = 0.0;
        for (double v : model.importances) {
            check(v >= 0.0, "negative importance");
            sum += v;
        }
        check(std::abs(sum - 1.0) < 1e-12, "importance sum " + fmt(sum));

        // Label-shift equivariance.
        for (double k : {-3.0, 0.5, 10.0}) {
            std::vector<double> shifted(labels);
            for (auto& y : shifted) y += k;
            ForestModel moved = fit_forest(features, shifted, config);
            for (std::size_t i = 0; i < std::min<std::size_t>(n, 10); ++i) {
                double a = predict_regression(model, features.row(i));
                double b = predict_regression(moved, features.row(i));
                check(std::abs(b - (a + k)) < 1e-9,
                      "shift by " + fmt(k) + " moved a prediction by " + fmt(b - a));
            }
        }

        // Same seed, same forest — bitwise.
        ForestModel replay = fit_forest(features, labels, config);
        for (std::size_t i = 0; i < std::min<std::size_t>(n, 10); ++i) {
            check(predict_regression(model, features.row(i)) ==
                      predict_regression(replay, features.row(i)),
                  "same-seed refit changed a prediction");
        }
    }
}

// --- criterion 6: metrics vs a two-pass reference ------------------------

void criterion_metrics() {
    // Hand-checked example: predicting the mean of [1,2,3] gives R^2 = 0.
    {
        std::vector<double> actual{1.0, 2.0, 3.0};
        std::vector<double> flat{2.0, 2.0, 2.0};
        EvalReport eval = evaluate(actual, flat);
        check(std::abs(eval.mse - 2.0 / 3.0) < 1e-15, "mse of the mean predictor");
        check(eval.r2 && std::abs(*eval.r2) < 1e-15, "r2 of the mean predictor");
        check(!eval.pearson, "pearson must be undefined for constant predictions");

        EvalReport perfect = evaluate(actual, actual);
        check(perfect.r2 && *perfect.r2 == 1.0, "perfect r2");
        check(perfect.pearson && *perfect.pearson == 1.0, "perfect pearson");

        std::vector<double> reversed{3.0, 2.0, 1.0};
        EvalReport anti = evaluate(actual, reversed);
        check(anti.pearson && std::abs(*anti.pearson + 1.0) < 1e-15, "anti-correlation");
        check(anti.r2 && std::abs(*anti.r2 + 3.0) < 1e-15, "r2 of the reversed predictor");
    }

    // 200 random pairs against an independent two-pass long-double pass.
    std::mt19937_64 gen(6);
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t n = 2 + gen() % 99;
        std::uniform_real_distribution<double> value(-50.0, 50.0);
        std::vector<double> a(n), p(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = value(gen);
            p[i] = value(gen);
        }
        long double se = 0, ae = 0;
        for (std::size_t i = 0; i < n; ++i) {
            long double d = static_cast<long double>(p[i]) - a[i];
            se += d * d;
            ae += d < 0 ? -d : d;
        }
        long double mean_a = 0, mean_p = 0;
        for (std::size_t i = 0; i < n; ++i) {
            mean_a += a[i];
            mean_p += p[i];
        }
        mean_a /= n;
        mean_p /= n;
        long double var_a = 0, var_p = 0, cov = 0;
        for (std::size_t i = 0; i < n; ++i) {
            var_a += (a[i] - mean_a) * (a[i] - mean_a);
            var_p += (p[i] - mean_p) * (p[i] - mean_p);
            cov += (a[i] - mean_a) * (p[i] - mean_p);
        }
        double ref_mse = static_cast<double>(se / n);
        double ref_mae = static_cast<double>(ae / n);
        double ref_rmse = std::sqrt(ref_mse);
        double ref_r2 = static_cast<double>(1.0L - se / var_a);
        double ref_pearson = static_cast<double>(cov / sqrtl(var_a * var_p));

        EvalReport eval = evaluate(a, p);
        auto close = [](double x, double y) {
            return std::abs(x - y) <= 1e-10 * std::max({std::abs(x), std::abs(y), 1.0});
        };
        check(close(eval.mse, ref_mse), "mse " + fmt(eval.mse) + " vs " + fmt(ref_mse));
        check(close(eval.mae, ref_mae), "mae " + fmt(eval.mae) + " vs " + fmt(ref_mae));
        check(close(eval.rmse, ref_rmse), "rmse " + fmt(eval.rmse) + " vs " + fmt(ref_rmse));
        check(eval.r2 && close(*eval.r2, ref_r2), "r2 " + fmt(*eval.r2) + " vs " + fmt(ref_r2));
        check(eval.pearson && close(*eval.pearson, ref_pearson),
              "pearson " + fmt(*eval.pearson) + " vs " + fmt(ref_pearson));
        check(*eval.pearson >= -1.0 && *eval.pearson <= 1.0, "pearson outside [-1,1]");
    }
}

// --- criterion 7: window arithmetic --------------------------------------

void criterion_windowing() {
    TimeSeries series;
    series.name = "target";
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> value(5.0, 9.0);
    for (int i = 0; i < 100; ++i) {
        series.timestamps.push_back("2020-01-01");
        series.target.push_back(value(gen));
    }
    NormalizationParams norm = fit_normalizer(series);
    WindowedDataset windows = make_windows(series, 30, norm);
    check(windows.size() == 70, "expected 70 windows, got " + std::to_string(windows.size()));

    auto [train_set, test_set] = split_ordered(windows, 0.8);
    check(train_set.size() == 56, "expected 56 train windows");
    check(test_set.size() == 14, "expected 14 test windows");

    for (std::size_t i = 0; i < windows.size(); ++i) {
        // Window i holds normalized values of targets [i, i+30); its label
        // is target i+30 on both scales.
        for (std::size_t k = 0; k < 30; ++k) {
            check(windows.inputs.at(i, k) == norm.normalize(series.target[i + k]),
                  "window content mismatch");
        }
        check(windows.labels_orig[i] == series.target[i + 30], "original label mismatch");
        check(windows.labels_norm[i] == norm.normalize(series.target[i + 30]),
              "normalized label mismatch");
        check(std::abs(norm.denormalize(windows.labels_norm[i]) - windows.labels_orig[i]) < 1e-12,
              "scales disagree after round-trip");
    }
}

// --- criterion 8: hybrid beats its parts on the synthetic fixture --------

void criterion_hybrid_advantage() {
    TimeSeries series = generate_synthetic(SynthParams{}); // documented defaults

    // Calibrated once against the fixture and frozen. The small train
    // fraction leaves most of the annual temperature swing out of the train
    // span, and 3000 full-batch epochs at a high learning rate push the LSTM
    // to fit that span tightly, so it misses the unseen regime (the
    // overfitting signature). The window-only forest degrades less, and the
    // hybrid recovers further through the same-day exogenous features that
    // neither baseline sees.
    LstmConfig lstm;
    lstm.hidden_size = 32;
    lstm.epochs = 3000;
    lstm.learning_rate = 0.2;
    lstm.seed = 42;
    ForestConfig forest; // default feature subsampling, bootstrap on
    forest.num_trees = 300;
    forest.seed = 42;

    ComparisonReport report =
        run_baselines(series, lstm, forest, {FusionKind::Splice, true}, 30, 0.3);

    check(report.lstm_only.train_eval.r2.has_value() &&
              report.lstm_only.test_eval.r2.has_value(),
          "LSTM R^2 undefined");
    check(report.rf_only.test_eval.r2.has_value(), "forest R^2 undefined");
    check(report.hybrid.test_eval.r2.has_value(), "hybrid R^2 undefined");

    double lstm_train = *report.lstm_only.train_eval.r2;
    double lstm_test = *report.lstm_only.test_eval.r2;
    double rf_test = *report.rf_only.test_eval.r2;
    double hybrid_test = *report.hybrid.test_eval.r2;

    check(lstm_train - lstm_test > 0.2,
          "LSTM generalization gap " + fmt(lstm_train - lstm_test) + " (train " +
              fmt(lstm_train) + ", test " + fmt(lstm_test) + "), expected > 0.2");
    check(hybrid_test >= rf_test,
          "hybrid test R^2 " + fmt(hybrid_test) + " below forest-only " + fmt(rf_test));
    check(rf_test >= lstm_test,
          "forest-only test R^2 " + fmt(rf_test) + " below LSTM-only " + fmt(lstm_test));
    check(hybrid_test > 0.5, "hybrid test R^2 " + fmt(hybrid_test) + ", expected > 0.5");
}

// --- criterion 9: importance recovers the planted driver ------------------

void criterion_importance() {
    SynthParams params;
    params.length = 400;
    params.seed = 3;
    params.noise_sigma = 0.0;
    params.coupling_nitrite = 1.2;
    params.coupling_temp = 0.0;
    cmd_synth(params, work_path("importance_data.csv"));

    RunConfig config;
    config.input = work_path("importance_data.csv");
    config.exo_columns = {"temperature", "salinity", "oxygen", "nitrite", "pressure"};
    config.output_dir = work_path("importance_out");
    config.forest.seed = 42;
    cmd_importance(config);

    std::ifstream in(work_path("importance_out/importance.csv"));
    std::string line;
    std::getline(in, line);
    check(line == "feature,importance", "unexpected importance header: " + line);
    std::getline(in, line);
    check(line.rfind("nitrite,", 0) == 0, "top-ranked feature is '" + line + "', not nitrite");
    double pressure_weight = -1.0;
    while (std::getline(in, line)) {
        if (line.rfind("pressure,", 0) == 0) {
            pressure_weight = std::strtod(line.c_str() + 9, nullptr);
        }
    }
    check(pressure_weight >= 0.0, "pressure row missing from importance.csv");
    check(pressure_weight < 0.1,
          "pure-noise column weighted " + fmt(pressure_weight) + ", expected < 0.1");
}

// --- criterion 10: grid search ranks and reproduces ----------------------

void criterion_tuner() {
    SynthParams params;
    params.length = 200;
    params.seed = 10;
    TimeSeries series = generate_synthetic(params);

    const int epochs = 8;
    LstmGrid lstm_grid; // documented defaults: 2*2*2*2 = 16 combinations
    std::vector<LstmTuneRow> rows = grid_search_lstm(series, lstm_grid, epochs, 0.8, 42);
    check(rows.size() == 16, "expected 16 LSTM rows, got " + std::to_string(rows.size()));

    std::set<std::tuple<int, int, double, std::size_t>> seen;
    for (const auto& row : rows) {
        seen.insert({row.hidden_size, row.num_layers, row.learning_rate, row.sequence_len});
        check(row.status == "ok" && row.score.has_value(),
              "combination " + std::to_string(row.combo) + " failed: " + row.detail);
    }
    check(seen.size() == 16, "duplicate combinations in the sweep");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        check(*rows[i - 1].score >= *rows[i].score, "rows not sorted by score");
        check(rows[i].rank == i + 1, "rank numbering broken");
    }

    // Refit the winner standalone from its recorded sub-seed: the score must
    // come back bit-for-bit. The sweep scores combinations on the target
    // sequence alone, so the refit windows a copy without exogenous columns.
    const LstmTuneRow& best = rows.front();
    TimeSeries target_only = series;
    target_only.exo_names.clear();
    target_only.exogenous.clear();
    NormalizationParams norm = fit_normalizer(target_only);
    std::vector<NormalizationParams> exo_norms = fit_exo_normalizers(series);
    WindowedDataset windows = make_windows(target_only, best.sequence_len, norm);
    auto [train_set, test_set] = split_ordered(windows, 0.8);
    LstmConfig best_cfg;
    best_cfg.hidden_size = best.hidden_size;
    best_cfg.num_layers = best.num_layers;
    best_cfg.learning_rate = best.learning_rate;
    best_cfg.epochs = epochs;
    best_cfg.seed = best.seed;
    LstmParameters lstm = train_lstm(best_cfg, train_set);
    std::vector<double> predictions;
    for (std::size_t i = 0; i < test_set.size(); ++i) {
        predictions.push_back(norm.denormalize(forward(lstm, test_set.inputs.row(i))));
    }
    EvalReport eval = evaluate(test_set.labels_orig, predictions);
    check(eval.pearson.has_value(), "refit score undefined");
    check(*eval.pearson == *best.score,
          "standalone refit scored " + fmt(*eval.pearson) + " vs recorded " + fmt(*best.score));

    // Forest stage on features from the winning LSTM, exactly as the tune
    // command stages it.
    WindowedDataset full = make_windows(series, best.sequence_len, norm, exo_norms);
    DataMatrix features = extract_features(lstm, full, {FusionKind::Pred, true});
    RfGrid rf_grid; // documented defaults: 2*2*2 = 8 combinations
    std::vector<RfTuneRow> rf_rows = grid_search_rf(features, full.labels_orig, rf_grid, 0.8, 42);
    check(rf_rows.size() == 8, "expected 8 forest rows, got " + std::to_string(rf_rows.size()));
    for (const auto& row : rf_rows) {
        check(row.status == "ok" && row.score.has_value(),
              "forest combination " + std::to_string(row.combo) + " failed: " + row.detail);
    }

    const RfTuneRow& rf_best = rf_rows.front();
    std::size_t train_count = static_cast<std::size_t>(0.8 * static_cast<double>(features.rows));
    DataMatrix train_x = features.slice_rows(0, train_count);
    DataMatrix test_x = features.slice_rows(train_count, features.rows);
    std::vector<double> train_y(full.labels_orig.begin(),
                                full.labels_orig.begin() +
                                    static_cast<std::ptrdiff_t>(train_count));
    std::vector<double> test_y(full.labels_orig.begin() +
                                   static_cast<std::ptrdiff_t>(train_count),
                               full.labels_orig.end());
    ForestConfig rf_cfg;
    rf_cfg.num_trees = rf_best.num_trees;
    rf_cfg.max_depth = rf_best.max_depth;
    rf_cfg.min_samples_split = rf_best.min_samples_split;
    rf_cfg.seed = rf_best.seed;
    ForestModel rf_model = fit_forest(train_x, train_y, rf_cfg);
    EvalReport rf_eval = evaluate(test_y, predict_regression(rf_model, test_x));
    check(rf_eval.r2.has_value() && *rf_eval.r2 == *rf_best.score,
          "forest refit did not reproduce the recorded score");

    // The forest sweep is cheap enough to simply rerun for determinism.
    std::vector<RfTuneRow> replay = grid_search_rf(features, full.labels_orig, rf_grid, 0.8, 42);
    for (std::size_t i = 0; i < rf_rows.size(); ++i) {
        check(replay[i].combo == rf_rows[i].combo && replay[i].score == rf_rows[i].score,
              "forest sweep not deterministic");
    }
}

// --- criterion 11: byte-identical artifacts -------------------------------

void criterion_reproducible_artifacts() {
    SynthParams params;
    params.length = 120;
    params.seed = 11;
    cmd_synth(params, work_path("repro_data.csv"));

    RunConfig config;
    config.input = work_path("repro_data.csv");
    config.window_len = 12;
    config.lstm.hidden_size = 4;
    config.lstm.epochs = 5;
    config.lstm.seed = 9;
    config.forest.num_trees = 10;
    config.forest.seed = 9;

    config.output_dir = work_path("repro_a");
    cmd_train(config);
    config.output_dir = work_path("repro_b");
    cmd_train(config);

    for (const char* artifact : {"model.json", "report.json", "predictions.csv"}) {
        std::string a = slurp(work_path("repro_a/") + artifact);
        std::string b = slurp(work_path("repro_b/") + artifact);
        check(!a.empty(), std::string(artifact) + " is empty");
        check(a == b, std::string(artifact) + " differs between identical runs");
    }

    // Load -> save round-trips to the same bytes.
    HybridModel model = load_hybrid(work_path("repro_a/model.json"));
    save_hybrid(model, work_path("repro_roundtrip.json"));
    check(slurp(work_path("repro_a/model.json")) == slurp(work_path("repro_roundtrip.json")),
          "model file changed across a load/save round-trip");

    // And the loaded model predicts identically to the artifacts on disk.
    TimeSeries series = load_series(work_path("repro_data.csv"), "target", "date", {});
    WindowedDataset windows = make_windows(series, 12, model.target_norm, model.exo_norms);
    std::vector<double> direct = predict_hybrid(model, windows);
    HybridModel reloaded = load_hybrid(work_path("repro_roundtrip.json"));
    std::vector<double> via_roundtrip = predict_hybrid(reloaded, windows);
    check(direct == via_roundtrip, "round-tripped model predicts differently");
}

struct Criterion {
    const char* description;
    double budget_seconds;
    std::function<void()> body;
};

} // namespace

int main() {
    g_work = fs::temp_directory_path() / "lstmrf_acceptance";
    fs::remove_all(g_work);
    fs::create_directories(g_work);

    const std::vector<Criterion> criteria{
        {"analytic BPTT gradients match central finite differences (50 instances)", 60.0,
         criterion_gradients},
        {"LSTM cell honors five closed-form identities (100 random states)", 5.0,
         criterion_cell_identities},
        {"best split agrees with exhaustive enumeration (100 datasets, tie-breaks)", 30.0,
         criterion_split_oracle},
        {"unconstrained forest drives training MSE to exactly zero (20 instances)", 10.0,
         criterion_perfect_fit},
        {"ensemble invariants: range bound, importance sum, shift equivariance, seeds", 60.0,
         criterion_ensemble_invariants},
        {"metrics match a two-pass reference on 200 random pairs", 5.0, criterion_metrics},
        {"windowing and ordered split arithmetic (100 rows, window 30)", 1.0,
         criterion_windowing},
        {"hybrid >= forest-only >= LSTM-only on the synthetic fixture; LSTM overfits", 300.0,
         criterion_hybrid_advantage},
        {"importance ranks the planted driver first, noise column near zero", 60.0,
         criterion_importance},
        {"default grids rank deterministically; winners refit to identical scores", 600.0,
         criterion_tuner},
        {"training artifacts are byte-identical across reruns and round-trips", 60.0,
         criterion_reproducible_artifacts},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const Criterion& criterion = criteria[i];
        auto start = std::chrono::steady_clock::now();
        std::string detail;
        bool passed = true;
        try {
            criterion.body();
        } catch (const std::exception& e) {
            passed = false;
            detail = e.what();
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (passed && elapsed > criterion.budget_seconds) {
            passed = false;
            detail = "time budget exceeded (" + fmt(elapsed) + "s > " +
                     fmt(criterion.budget_seconds) + "s)";
        }
        std::printf("[%2zu] %s  %s (%.1fs)\n", i + 1, passed ? "PASS" : "FAIL",
                    criterion.description, elapsed);
        if (!passed) {
            std::printf("      %s\n", detail.c_str());
            ++failures;
        }
        std::fflush(stdout);
    }

    std::printf("%zu/%zu acceptance criteria passed\n", criteria.size() - failures,
                criteria.size());
    fs::remove_all(g_work);
    return failures == 0 ? 0 : 1;
}
