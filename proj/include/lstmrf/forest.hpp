#pragma once

#include "lstmrf/matrix.hpp"
#include "lstmrf/rng.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lstmrf {

/// Sentinel conventions: max_depth = kUnbounded grows trees until another
/// stopping rule fires; max_features = kAutoFeatures picks ceil(d/3) at fit
/// time, kAllFeatures considers every feature at every split.
inline constexpr int kUnbounded = -1;
inline constexpr int kAutoFeatures = 0;
inline constexpr int kAllFeatures = -1;

struct ForestConfig {
    int num_trees = 100;
    int max_depth = kUnbounded;
    int min_samples_split = 2;
    int max_features = kAutoFeatures;
    bool bootstrap = true; // full-sample mode exists for deterministic oracle tests
    std::uint64_t seed = 42;

    /// Throws ValidationError; feature_count checks max_features when known.
    void validate(std::size_t feature_count = 0) const;

    /// Actual candidate count per split for `feature_count` features.
    std::size_t resolve_max_features(std::size_t feature_count) const;
};

enum class TreeTask { Regression, Classification };

/// Arena node: feature == -1 marks a leaf. Internal nodes route a sample
/// left iff x[feature] <= threshold. `decrease` is the per-sample impurity
/// decrease the split achieved on its training subset (variance reduction
/// for regression, Gini decrease for classification).
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    double value = 0.0; // leaf prediction: label mean (regression) or majority class
    double decrease = 0.0;
    std::size_t samples = 0;
    int left = -1;
    int right = -1;

    bool is_leaf() const { return feature < 0; }
};

/// One decision tree as a preorder arena; nodes[0] is the root.
struct Tree {
    std::vector<TreeNode> nodes;

    double predict(std::span<const double> x) const;
};

struct ForestModel {
    ForestConfig config;
    TreeTask task = TreeTask::Regression;
    std::size_t feature_count = 0;
    std::vector<std::string> feature_names; // optional labels, may be empty
    std::vector<Tree> trees;
    std::vector<double> importances; // normalized MDI, all zeros when no tree split

    /// Per-tree bootstrap draws (row indices into the training matrix).
    /// Diagnostic only; not serialized.
    std::vector<std::vector<std::size_t>> bootstrap_indices;
};

/// N draws with replacement from {0, ..., n-1}, deterministic given the rng.
std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng);

struct SplitResult {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0; // per-sample impurity decrease, > 0 when found
};

/// Exhaustive scan over `candidates` (tried in ascending index order) and all
/// midpoints between consecutive distinct sorted values of each, maximizing
/// the per-sample impurity decrease. Ties keep the lowest feature index,
/// then the lowest threshold. Returns found = false when labels are constant
/// or no candidate threshold reduces impurity.
SplitResult best_split(const DataMatrix& features, std::span<const double> labels,
                       std::span<const std::size_t> sample_indices,
                       std::span<const std::size_t> candidates, TreeTask task);

/// Recursive CART construction over the given sample subset. Splitting stops
/// at max_depth, below min_samples_split, on constant labels, or when no
/// split helps. Candidate features at each internal node are a fresh subset
/// of size resolve_max_features(d) drawn from `rng`.
Tree build_tree(const DataMatrix& features, std::span<const double> labels,
                std::span<const std::size_t> sample_indices, const ForestConfig& config,
                Rng& rng, TreeTask task);

/// Fits num_trees trees, each on its own bootstrap resample with its own
/// deterministic substream derived from (config.seed, tree index), so the
/// result does not depend on how tree fitting is scheduled. `threads` caps
/// concurrent tree builders.
ForestModel fit_forest(const DataMatrix& features, std::span<const double> labels,
                       const ForestConfig& config, TreeTask task = TreeTask::Regression,
                       const std::vector<std::string>& feature_names = {}, int threads = 1);

/// Mean of the tree outputs (ensemble regression).
double predict_regression(const ForestModel& model, std::span<const double> x);
std::vector<double> predict_regression(const ForestModel& model, const DataMatrix& rows);

/// Majority vote over tree outputs; ties go to the smallest label.
double predict_classification(const ForestModel& model, std::span<const double> x);

/// Mean-decrease-in-impurity importances: per feature, the sum over all
/// nodes splitting on it of sample_count * decrease, normalized to sum to 1.
/// All zeros when every tree is a single leaf.
std::vector<double> importance(const ForestModel& model);

/// (feature_name, importance) rows sorted by importance descending, ties by
/// feature index. Names fall back to f0, f1, ... when the model has none.
void write_importance_csv(const ForestModel& model, const std::string& path);

} // namespace lstmrf
