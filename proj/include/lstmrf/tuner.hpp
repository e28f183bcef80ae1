#pragma once

#include "lstmrf/dataio.hpp"
#include "lstmrf/forest.hpp"
#include "lstmrf/matrix.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lstmrf {

/// Value sets for the exhaustive LSTM sweep. Combinations are enumerated
/// with hidden_size outermost and sequence_len innermost; that enumeration
/// order doubles as the tie-break between equal scores.
struct LstmGrid {
    std::vector<int> hidden_sizes{32, 50};
    std::vector<int> num_layers{1, 2};
    std::vector<double> learning_rates{0.001, 0.005};
    std::vector<std::size_t> sequence_lens{20, 30};

    std::size_t combinations() const;
    void validate() const; // every value set non-empty
};

struct RfGrid {
    std::vector<int> num_trees{50, 100};
    std::vector<int> max_depths{kUnbounded, 10};
    std::vector<int> min_samples_splits{2, 5};

    std::size_t combinations() const;
    void validate() const;
};

/// One grid-search result. `seed` is the combination's derived sub-seed —
/// refitting standalone with it reproduces `score` bit-exactly. Failed
/// combinations carry a message and rank after every scored row.
struct LstmTuneRow {
    std::size_t rank = 0;
    std::size_t combo = 0;
    int hidden_size = 0;
    int num_layers = 0;
    double learning_rate = 0.0;
    std::size_t sequence_len = 0;
    std::uint64_t seed = 0;
    std::optional<double> score; // test-partition Pearson correlation
    std::string status = "ok";   // "ok" or "failed"
    std::string detail;
};

struct RfTuneRow {
    std::size_t rank = 0;
    std::size_t combo = 0;
    int num_trees = 0;
    int max_depth = 0;
    int min_samples_split = 0;
    std::uint64_t seed = 0;
    std::optional<double> score; // test-partition R^2
    std::string status = "ok";
    std::string detail;
};

/// Every combination gets a full window/split/train/evaluate cycle on the
/// series with its own sub-seed Rng::derive(master_seed, combo). Rows come
/// back ranked: score descending, ties by combination index, failures last.
/// `epochs` caps each fit (the grid itself does not sweep epochs).
std::vector<LstmTuneRow> grid_search_lstm(const TimeSeries& series, const LstmGrid& grid,
                                          int epochs, double train_fraction,
                                          std::uint64_t master_seed, int threads = 1);

/// Analogous sweep for the forest on a fixed feature matrix; the ordered
/// split happens on the rows. Sub-seeds come from a disjoint stream range
/// so LSTM and RF sweeps never share randomness.
std::vector<RfTuneRow> grid_search_rf(const DataMatrix& features,
                                      const std::vector<double>& labels, const RfGrid& grid,
                                      double train_fraction, std::uint64_t master_seed,
                                      int threads = 1);

void write_lstm_grid_csv(const std::vector<LstmTuneRow>& rows, const std::string& path);
void write_rf_grid_csv(const std::vector<RfTuneRow>& rows, const std::string& path);

} // namespace lstmrf
