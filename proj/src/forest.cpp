#include "lstmrf/forest.hpp"

#include "lstmrf/csv.hpp"
#include "lstmrf/errors.hpp"
#include "lstmrf/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

namespace lstmrf {

void ForestConfig::validate(std::size_t feature_count) const {
    if (num_trees < 1) throw ValidationError("num_trees must be >= 1");
    if (max_depth != kUnbounded && max_depth < 1) {
        throw ValidationError("max_depth must be >= 1 or unbounded (-1)");
    }
    if (min_samples_split < 2) throw ValidationError("min_samples_split must be >= 2");
    if (max_features < kAllFeatures) {
        throw ValidationError("max_features must be a positive count, 0 (auto) or -1 (all)");
    }
    if (feature_count > 0 && max_features > 0 &&
        static_cast<std::size_t>(max_features) > feature_count) {
        throw ValidationError("max_features " + std::to_string(max_features) +
                              " exceeds feature count " + std::to_string(feature_count));
    }
}

std::size_t ForestConfig::resolve_max_features(std::size_t feature_count) const {
    if (max_features == kAllFeatures) return feature_count;
    if (max_features == kAutoFeatures) return (feature_count + 2) / 3; // ceil(d/3)
    return std::min(static_cast<std::size_t>(max_features), feature_count);
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, Rng& rng) {
    if (n == 0) throw ValidationError("bootstrap from empty dataset");
    std::vector<std::size_t> indices(n);
    for (auto& idx : indices) idx = rng.next_index(n);
    return indices;
}

double Tree::predict(std::span<const double> x) const {
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const TreeNode& cur = nodes[static_cast<std::size_t>(node)];
        node = (x[static_cast<std::size_t>(cur.feature)] <= cur.threshold) ? cur.left : cur.right;
    }
    return nodes[static_cast<std::size_t>(node)].value;
}

namespace {

bool labels_constant(std::span<const double> labels, std::span<const std::size_t> indices) {
    double first = labels[indices[0]];
    for (std::size_t idx : indices) {
        if (labels[idx] != first) return false;
    }
    return true;
}

/// Distinct node labels in ascending order (classification class list).
std::vector<double> node_classes(std::span<const double> labels,
                                 std::span<const std::size_t> indices) {
    std::vector<double> classes;
    classes.reserve(indices.size());
    for (std::size_t idx : indices) classes.push_back(labels[idx]);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    return classes;
}

/// Sample indices ordered by (feature value, index) — the tie-break keeps
/// the sweep order platform-independent.
void order_by_feature(const DataMatrix& features, std::span<const std::size_t> indices,
                      std::size_t feature, std::vector<std::size_t>& out) {
    out.assign(indices.begin(), indices.end());
    std::sort(out.begin(), out.end(), [&](std::size_t a, std::size_t b) {
        double xa = features.at(a, feature);
        double xb = features.at(b, feature);
        if (xa != xb) return xa < xb;
        return a < b;
    });
}

/// Relative tie window for regression split comparisons, in units of parent
/// impurity per sample. Prefix sums accumulate in per-feature sweep order, so
/// two splits that are mathematically tied (e.g. the same sample partition
/// reached through different features) can round to values a few ulps apart.
/// Requiring a challenger to win by more than this window makes the
/// documented tie rule — lowest feature index, then lowest threshold — hold
/// in floating point, and keeps split choices stable when all labels are
/// shifted or rescaled.
constexpr double kSplitTieRel = 1e-10;

/// Node-level label statistics shared by every per-feature regression scan.
/// Computed once per node in sample-index order so that every feature sees
/// bitwise-identical totals, and centered on the node mean so that rounding
/// noise scales with the node's own spread rather than the labels' absolute
/// magnitude.
struct NodeStats {
    double mean = 0.0;
    double total_c = 0.0;  // sum of centered labels (near zero)
    double total_c2 = 0.0; // sum of squared centered labels
    double parent_sse = 0.0;
    double tie_eps = 0.0;
};

NodeStats node_stats_regression(std::span<const double> labels,
                                std::span<const std::size_t> indices) {
    NodeStats stats;
    const double n = static_cast<double>(indices.size());
    double sum = 0.0;
    for (std::size_t idx : indices) sum += labels[idx];
    stats.mean = sum / n;
    for (std::size_t idx : indices) {
        double c = labels[idx] - stats.mean;
        stats.total_c += c;
        stats.total_c2 += c * c;
    }
    stats.parent_sse = stats.total_c2 - stats.total_c * stats.total_c / n;
    stats.tie_eps = kSplitTieRel * stats.parent_sse / n;
    return stats;
}

/// Best threshold on one feature by variance reduction, via prefix sums of
/// centered labels over the sorted sweep. Returns decrease 0 when no cut
/// beats the tie window.
void scan_feature_regression(const DataMatrix& features, std::span<const double> labels,
                             std::span<const std::size_t> indices, std::size_t feature,
                             const NodeStats& stats, std::vector<std::size_t>& order,
                             double& best_decrease, double& best_threshold) {
    order_by_feature(features, indices, feature, order);
    const std::size_t n = order.size();

    double left_c = 0.0, left_c2 = 0.0;
    best_decrease = 0.0;
    best_threshold = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        double c = labels[order[k - 1]] - stats.mean;
        left_c += c;
        left_c2 += c * c;
        double x_lo = features.at(order[k - 1], feature);
        double x_hi = features.at(order[k], feature);
        if (x_lo == x_hi) continue; // threshold must separate distinct values

        double nl = static_cast<double>(k);
        double nr = static_cast<double>(n - k);
        double sse_left = left_c2 - left_c * left_c / nl;
        double sse_right =
            (stats.total_c2 - left_c2) - (stats.total_c - left_c) * (stats.total_c - left_c) / nr;
        double decrease = (stats.parent_sse - sse_left - sse_right) / static_cast<double>(n);
        if (decrease > best_decrease + stats.tie_eps) {
            best_decrease = decrease;
            best_threshold = 0.5 * (x_lo + x_hi);
        }
    }
}

/// Classification analog: Gini decrease with incremental class counts.
void scan_feature_gini(const DataMatrix& features, std::span<const double> labels,
                       std::span<const std::size_t> indices, std::size_t feature,
                       const std::vector<double>& classes, std::vector<std::size_t>& order,
                       double& best_decrease, double& best_threshold) {
    order_by_feature(features, indices, feature, order);
    const std::size_t n = order.size();
    const std::size_t n_classes = classes.size();

    auto class_of = [&](std::size_t idx) {
        return static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), labels[idx]) - classes.begin());
    };

    std::vector<double> right(n_classes, 0.0), left(n_classes, 0.0);
    for (std::size_t idx : order) right[class_of(idx)] += 1.0;

    double right_sq = 0.0;
    for (double c : right) right_sq += c * c;
    double left_sq = 0.0;
    const double nn = static_cast<double>(n);
    const double parent_gini = 1.0 - right_sq / (nn * nn);

    best_decrease = 0.0;
    best_threshold = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        std::size_t c = class_of(order[k - 1]);
        left_sq += 2.0 * left[c] + 1.0;
        right_sq += -2.0 * right[c] + 1.0;
        left[c] += 1.0;
        right[c] -= 1.0;

        double x_lo = features.at(order[k - 1], feature);
        double x_hi = features.at(order[k], feature);
        if (x_lo == x_hi) continue;

        double nl = static_cast<double>(k);
        double nr = static_cast<double>(n - k);
        double gini_left = 1.0 - left_sq / (nl * nl);
        double gini_right = 1.0 - right_sq / (nr * nr);
        double decrease = parent_gini - (nl * gini_left + nr * gini_right) / nn;
        if (decrease > best_decrease) {
            best_decrease = decrease;
            best_threshold = 0.5 * (x_lo + x_hi);
        }
    }
}

double leaf_value(std::span<const double> labels, std::span<const std::size_t> indices,
                  TreeTask task) {
    if (task == TreeTask::Regression) {
        double sum = 0.0;
        for (std::size_t idx : indices) sum += labels[idx];
        return sum / static_cast<double>(indices.size());
    }
    // Majority class; ties go to the smallest label (classes are ascending).
    std::vector<double> classes = node_classes(labels, indices);
    std::vector<std::size_t> votes(classes.size(), 0);
    for (std::size_t idx : indices) {
        auto c = static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), labels[idx]) - classes.begin());
        ++votes[c];
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes.size(); ++c) {
        if (votes[c] > votes[best]) best = c;
    }
    return classes[best];
}

/// Fresh candidate subset of size m drawn from {0..d-1} without replacement
/// (partial Fisher-Yates), returned ascending so the lowest-index tie-break
/// is well defined. m == d skips the draw entirely.
void draw_candidates(std::size_t d, std::size_t m, Rng& rng, std::vector<std::size_t>& pool,
                     std::vector<std::size_t>& out) {
    out.clear();
    if (m >= d) {
        for (std::size_t f = 0; f < d; ++f) out.push_back(f);
        return;
    }
    pool.resize(d);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t j = 0; j < m; ++j) {
        std::size_t k = j + rng.next_index(d - j);
        std::swap(pool[j], pool[k]);
        out.push_back(pool[j]);
    }
    std::sort(out.begin(), out.end());
}

struct TreeBuilder {
    const DataMatrix& features;
    std::span<const double> labels;
    const ForestConfig& config;
    Rng& rng;
    TreeTask task;
    std::size_t m; // candidates per split
    Tree tree;
    std::vector<std::size_t> pool, candidates, order;

    int build(std::vector<std::size_t>& indices, int depth) {
        int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        tree.nodes.back().samples = indices.size();

        bool depth_reached = config.max_depth != kUnbounded && depth >= config.max_depth;
        bool too_small = indices.size() < static_cast<std::size_t>(config.min_samples_split);
        if (depth_reached || too_small || labels_constant(labels, indices)) {
            tree.nodes[static_cast<std::size_t>(id)].value = leaf_value(labels, indices, task);
            return id;
        }

        draw_candidates(features.cols, m, rng, pool, candidates);
        SplitResult split = best_split(features, labels, indices, candidates, task);
        if (!split.found) {
            tree.nodes[static_cast<std::size_t>(id)].value = leaf_value(labels, indices, task);
            return id;
        }

        std::vector<std::size_t> left, right;
        left.reserve(indices.size());
        right.reserve(indices.size());
        for (std::size_t idx : indices) {
            auto f = static_cast<std::size_t>(split.feature);
            (features.at(idx, f) <= split.threshold ? left : right).push_back(idx);
        }
        indices.clear();
        indices.shrink_to_fit();

        tree.nodes[static_cast<std::size_t>(id)].feature = split.feature;
        tree.nodes[static_cast<std::size_t>(id)].threshold = split.threshold;
        tree.nodes[static_cast<std::size_t>(id)].decrease = split.decrease;
        int left_id = build(left, depth + 1);
        tree.nodes[static_cast<std::size_t>(id)].left = left_id;
        int right_id = build(right, depth + 1);
        tree.nodes[static_cast<std::size_t>(id)].right = right_id;
        return id;
    }
};

} // namespace

SplitResult best_split(const DataMatrix& features, std::span<const double> labels,
                       std::span<const std::size_t> sample_indices,
                       std::span<const std::size_t> candidates, TreeTask task) {
    SplitResult result;
    if (sample_indices.size() < 2 || candidates.empty()) return result;
    // Constant labels mean zero parent impurity; bail out before any floating
    // arithmetic can manufacture a spurious positive decrease.
    if (labels_constant(labels, sample_indices)) return result;

    std::vector<double> classes;
    NodeStats stats;
    // Gini arithmetic is exact integer counting, so mathematically tied
    // splits already compare bitwise equal; only regression needs a window.
    double tie_eps = 0.0;
    if (task == TreeTask::Classification) {
        classes = node_classes(labels, sample_indices);
    } else {
        stats = node_stats_regression(labels, sample_indices);
        tie_eps = stats.tie_eps;
    }

    std::vector<std::size_t> order;
    for (std::size_t feature : candidates) {
        double decrease = 0.0, threshold = 0.0;
        if (task == TreeTask::Regression) {
            scan_feature_regression(features, labels, sample_indices, feature, stats, order,
                                    decrease, threshold);
        } else {
            scan_feature_gini(features, labels, sample_indices, feature, classes, order, decrease,
                              threshold);
        }
        // Challengers must win by more than the tie window, so the earliest
        // (lowest-index) feature survives ties; the per-feature scan already
        // keeps the lowest threshold the same way.
        if (decrease > tie_eps && (!result.found || decrease > result.decrease + tie_eps)) {
            result.found = true;
            result.feature = static_cast<int>(feature);
            result.threshold = threshold;
            result.decrease = decrease;
        }
    }
    return result;
}

Tree build_tree(const DataMatrix& features, std::span<const double> labels,
                std::span<const std::size_t> sample_indices, const ForestConfig& config,
                Rng& rng, TreeTask task) {
    if (sample_indices.empty()) throw ValidationError("build_tree on empty sample set");
    TreeBuilder builder{features,
                        labels,
                        config,
                        rng,
                        task,
                        config.resolve_max_features(features.cols),
                        {},
                        {},
                        {},
                        {}};
    std::vector<std::size_t> root(sample_indices.begin(), sample_indices.end());
    builder.build(root, 0);
    return std::move(builder.tree);
}

ForestModel fit_forest(const DataMatrix& features, std::span<const double> labels,
                       const ForestConfig& config, TreeTask task,
                       const std::vector<std::string>& feature_names, int threads) {
    config.validate(features.cols);
    if (features.rows == 0 || features.cols == 0) {
        throw ValidationError("forest training set is empty");
    }
    if (features.rows != labels.size()) {
        throw ValidationError("feature rows do not match label count");
    }
    if (!feature_names.empty() && feature_names.size() != features.cols) {
        throw ValidationError("feature name count does not match feature columns");
    }

    ForestModel model;
    model.config = config;
    model.task = task;
    model.feature_count = features.cols;
    model.feature_names = feature_names;
    model.trees.resize(static_cast<std::size_t>(config.num_trees));
    model.bootstrap_indices.resize(model.trees.size());

    parallel_for(model.trees.size(), threads, [&](std::size_t b) {
        Rng rng(Rng::derive(config.seed, b));
        std::vector<std::size_t> indices;
        if (config.bootstrap) {
            indices = bootstrap_sample(features.rows, rng);
        } else {
            indices.resize(features.rows);
            std::iota(indices.begin(), indices.end(), std::size_t{0});
        }
        model.trees[b] = build_tree(features, labels, indices, config, rng, task);
        model.bootstrap_indices[b] = std::move(indices);
    });

    model.importances = importance(model);
    return model;
}

double predict_regression(const ForestModel& model, std::span<const double> x) {
    if (x.size() != model.feature_count) {
        throw ValidationError("prediction input has " + std::to_string(x.size()) +
                              " features, model expects " + std::to_string(model.feature_count));
    }
    double sum = 0.0;
    for (const Tree& tree : model.trees) sum += tree.predict(x);
    return sum / static_cast<double>(model.trees.size());
}

std::vector<double> predict_regression(const ForestModel& model, const DataMatrix& rows) {
    std::vector<double> out;
    out.reserve(rows.rows);
    for (std::size_t r = 0; r < rows.rows; ++r) {
        out.push_back(predict_regression(model, rows.row(r)));
    }
    return out;
}

double predict_classification(const ForestModel& model, std::span<const double> x) {
    if (x.size() != model.feature_count) {
        throw ValidationError("prediction input has " + std::to_string(x.size()) +
                              " features, model expects " + std::to_string(model.feature_count));
    }
    // Vote tally keyed by label, ascending; ties resolve to the smallest label.
    std::vector<std::pair<double, std::size_t>> votes;
    for (const Tree& tree : model.trees) {
        double label = tree.predict(x);
        auto it = std::lower_bound(votes.begin(), votes.end(), label,
                                   [](const auto& v, double l) { return v.first < l; });
        if (it != votes.end() && it->first == label) {
            ++it->second;
        } else {
            votes.insert(it, {label, 1});
        }
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < votes.size(); ++c) {
        if (votes[c].second > votes[best].second) best = c;
    }
    return votes[best].first;
}

std::vector<double> importance(const ForestModel& model) {
    std::vector<double> scores(model.feature_count, 0.0);
    double total = 0.0;
    for (const Tree& tree : model.trees) {
        for (const TreeNode& node : tree.nodes) {
            if (node.is_leaf()) continue;
            double weighted = static_cast<double>(node.samples) * node.decrease;
            scores[static_cast<std::size_t>(node.feature)] += weighted;
            total += weighted;
        }
    }
    if (total > 0.0) {
        for (double& s : scores) s /= total;
    }
    return scores;
}

void write_importance_csv(const ForestModel& model, const std::string& path) {
    std::vector<std::size_t> order(model.feature_count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return model.importances[a] > model.importances[b];
    });

    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "feature,importance\n";
    for (std::size_t f : order) {
        std::string name = f < model.feature_names.size() ? model.feature_names[f]
                                                          : "f" + std::to_string(f);
        out << name << "," << csv::format_double(model.importances[f]) << "\n";
    }
    if (!out.good()) throw IoError("failed while writing " + path);
}

} // namespace lstmrf
