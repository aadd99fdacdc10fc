// Copyright 2026 The dhda Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DHDA_PARTITION_HPP_
#define DHDA_PARTITION_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dhda/rng.hpp"
#include "dhda/types.hpp"

namespace dhda {

// How a tree reports its total importance G.
//   VarianceFraction: sum of impurity decreases over root SSE, in [0, 1].
//   RawDecrease:      mean impurity decrease per sample, scale-dependent.
enum class ImportanceMode { VarianceFraction, RawDecrease };

struct GlobalDriftConfig {
    double delta = 0.05; // significance level of the extended Hoeffding bound
    int depth = 1;       // CART depth d used for division extraction
};

namespace detail {

struct SplitChoice {
    int option = -1;
    double threshold = 0.0;
    double gain = 0.0; // SSE(parent) - SSE(left) - SSE(right)
    std::size_t n_left = 0;
};

// Greedy variance-reduction split over the given sample indices.
// Candidate thresholds are midpoints between consecutive distinct sorted
// values; a split is admissible only if both children are nonempty and the
// gain is strictly positive. Ties resolve to the lowest option index, then
// the smallest threshold (options must be passed in ascending order).
// Targets are centered on the node mean before accumulation to keep the
// prefix sums numerically stable.
inline std::optional<SplitChoice> find_best_split(std::span<const ConfigurationSample> samples,
                                                  std::span<const std::size_t> idx,
                                                  std::span<const int> options,
                                                  std::size_t min_leaf) {
    const std::size_t n = idx.size();
    if (n < 2 * min_leaf || n < 2) return std::nullopt;

    double mean = 0.0;
    for (std::size_t i : idx) mean += samples[i].performance;
    mean /= static_cast<double>(n);

    double sse_parent = 0.0;
    for (std::size_t i : idx) {
        const double c = samples[i].performance - mean;
        sse_parent += c * c;
    }
    if (sse_parent <= 0.0) return std::nullopt;

    std::vector<std::pair<double, double>> column(n); // (option value, centered target)
    std::optional<SplitChoice> best;

    for (int option : options) {
        for (std::size_t k = 0; k < n; ++k) {
            const auto& s = samples[idx[k]];
            column[k] = {s.features[static_cast<std::size_t>(option)], s.performance - mean};
        }
        std::sort(column.begin(), column.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        double total_y = 0.0, total_y2 = 0.0;
        for (const auto& [v, y] : column) {
            total_y += y;
            total_y2 += y * y;
        }

        double cum_y = 0.0, cum_y2 = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            cum_y += column[k].second;
            cum_y2 += column[k].second * column[k].second;
            if (column[k].first >= column[k + 1].first) continue; // no boundary here
            const std::size_t n_left = k + 1;
            const std::size_t n_right = n - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            const double sse_left = cum_y2 - cum_y * cum_y / static_cast<double>(n_left);
            const double rem_y = total_y - cum_y;
            const double sse_right =
                (total_y2 - cum_y2) - rem_y * rem_y / static_cast<double>(n_right);
            const double gain = sse_parent - sse_left - sse_right;
            if (gain <= 0.0) continue;
            if (!best || gain > best->gain) {
                best = SplitChoice{option, 0.5 * (column[k].first + column[k + 1].first), gain,
                                   n_left};
            }
        }
    }
    return best;
}

} // namespace detail

struct TreeNode {
    int split_option = -1; // -1 marks a leaf
    double split_threshold = 0.0;
    double impurity = 0.0; // variance of performance values at the node
    std::size_t count = 0;
    double impurity_decrease = 0.0; // n*var - n_l*var_l - n_r*var_r, >= 0
    double leaf_mean = 0.0;
    int left = -1;
    int right = -1;
    int depth = 0;

    bool is_leaf() const { return split_option < 0; }
};

struct TreeGrowth {
    int max_depth = 1;
    int mtry = 0; // candidate options per node; 0 means all
    std::uint64_t seed = 0;
    std::size_t min_leaf = 1;
    bool record_leaf_samples = false;
};

// Depth-bounded CART with per-node impurity bookkeeping. Deterministic
// given the samples, growth parameters and seed.
class RegressionTree {
  public:
    static RegressionTree train(std::span<const ConfigurationSample> samples,
                                const TreeGrowth& growth) {
        if (samples.empty()) throw std::invalid_argument("RegressionTree: no training samples");
        std::vector<std::size_t> idx(samples.size());
        std::iota(idx.begin(), idx.end(), 0);
        return train(samples, std::move(idx), growth);
    }

    static RegressionTree train(std::span<const ConfigurationSample> samples,
                                std::vector<std::size_t> idx, const TreeGrowth& growth) {
        if (idx.empty()) throw std::invalid_argument("RegressionTree: no training samples");
        RegressionTree tree;
        tree.max_depth_ = growth.max_depth;
        tree.arity_ = samples[idx.front()].features.size();
        SplitMix64 rng(growth.seed);
        tree.grow(samples, std::move(idx), 0, growth, rng);
        return tree;
    }

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    int max_depth() const { return max_depth_; }
    std::size_t arity() const { return arity_; }
    std::size_t root_count() const { return nodes_.front().count; }

    double predict(Features x) const {
        int node = 0;
        while (!nodes_[static_cast<std::size_t>(node)].is_leaf()) {
            const auto& nd = nodes_[static_cast<std::size_t>(node)];
            node = x[static_cast<std::size_t>(nd.split_option)] <= nd.split_threshold ? nd.left
                                                                                      : nd.right;
        }
        return nodes_[static_cast<std::size_t>(node)].leaf_mean;
    }

    // Fraction of the root variance explained by the tree's splits
    // (VarianceFraction) or the mean impurity decrease per sample
    // (RawDecrease). Zero for a single leaf or a zero-impurity root.
    double total_importance(ImportanceMode mode = ImportanceMode::VarianceFraction) const {
        const auto& root = nodes_.front();
        double total_decrease = 0.0;
        for (const auto& nd : nodes_)
            if (!nd.is_leaf()) total_decrease += std::max(0.0, nd.impurity_decrease);
        if (total_decrease <= 0.0) return 0.0;
        if (mode == ImportanceMode::RawDecrease)
            return total_decrease / static_cast<double>(root.count);
        const double root_sse = root.impurity * static_cast<double>(root.count);
        if (root_sse <= 0.0) return 0.0;
        return std::clamp(total_decrease / root_sse, 0.0, 1.0);
    }

    const std::vector<std::size_t>& leaf_samples(int node) const {
        return leaf_samples_[static_cast<std::size_t>(node)];
    }

    void add_to(Fingerprint& fp) const {
        fp.add(nodes_.size());
        for (const auto& nd : nodes_) {
            fp.add(nd.split_option);
            fp.add(nd.split_threshold);
            fp.add(nd.leaf_mean);
            fp.add(nd.count);
        }
    }

  private:
    int grow(std::span<const ConfigurationSample> samples, std::vector<std::size_t> idx, int depth,
             const TreeGrowth& growth, SplitMix64& rng) {
        const int node_id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        leaf_samples_.emplace_back();

        const std::size_t n = idx.size();
        double mean = 0.0;
        for (std::size_t i : idx) mean += samples[i].performance;
        mean /= static_cast<double>(n);
        double sse = 0.0;
        for (std::size_t i : idx) {
            const double c = samples[i].performance - mean;
            sse += c * c;
        }

        {
            auto& nd = nodes_[static_cast<std::size_t>(node_id)];
            nd.count = n;
            nd.impurity = sse / static_cast<double>(n);
            nd.leaf_mean = mean;
            nd.depth = depth;
        }

        std::optional<detail::SplitChoice> split;
        if (depth < growth.max_depth) {
            std::vector<int> options = candidate_options(growth, rng);
            split = detail::find_best_split(samples, idx, options, growth.min_leaf);
        }

        if (!split) {
            if (growth.record_leaf_samples)
                leaf_samples_[static_cast<std::size_t>(node_id)] = std::move(idx);
            return node_id;
        }

        std::vector<std::size_t> left_idx, right_idx;
        left_idx.reserve(split->n_left);
        right_idx.reserve(n - split->n_left);
        for (std::size_t i : idx) {
            if (samples[i].features[static_cast<std::size_t>(split->option)] <= split->threshold)
                left_idx.push_back(i);
            else
                right_idx.push_back(i);
        }

        {
            auto& nd = nodes_[static_cast<std::size_t>(node_id)];
            nd.split_option = split->option;
            nd.split_threshold = split->threshold;
            nd.impurity_decrease = split->gain;
        }
        const int left = grow(samples, std::move(left_idx), depth + 1, growth, rng);
        const int right = grow(samples, std::move(right_idx), depth + 1, growth, rng);
        nodes_[static_cast<std::size_t>(node_id)].left = left;
        nodes_[static_cast<std::size_t>(node_id)].right = right;
        return node_id;
    }

    std::vector<int> candidate_options(const TreeGrowth& growth, SplitMix64& rng) const {
        std::vector<int> options(arity_);
        std::iota(options.begin(), options.end(), 0);
        if (growth.mtry <= 0 || static_cast<std::size_t>(growth.mtry) >= arity_) return options;
        // Fisher-Yates prefix, then ascending for deterministic tie-breaking
        for (int i = 0; i < growth.mtry; ++i) {
            const std::size_t j =
                static_cast<std::size_t>(i) + rng.next_index(options.size() - static_cast<std::size_t>(i));
            std::swap(options[static_cast<std::size_t>(i)], options[j]);
        }
        options.resize(static_cast<std::size_t>(growth.mtry));
        std::sort(options.begin(), options.end());
        return options;
    }

    std::vector<TreeNode> nodes_;
    std::vector<std::vector<std::size_t>> leaf_samples_;
    int max_depth_ = 0;
    std::size_t arity_ = 0;
};

// Trains the division CART: depth-bounded greedy variance reduction over
// all options, leaf populations recorded for extraction.
inline RegressionTree train_cart(std::span<const ConfigurationSample> samples, int depth) {
    if (depth < 1) throw std::invalid_argument("train_cart: depth must be >= 1");
    TreeGrowth growth;
    growth.max_depth = depth;
    growth.record_leaf_samples = true;
    return RegressionTree::train(samples, growth);
}

// Returns the leaf populations of the depth-d tree as divisions. A leaf
// smaller than min_division_size is merged into its sibling by collapsing
// the parent node, so every returned division is trainable.
inline std::vector<Division> extract_divisions(const RegressionTree& tree,
                                               std::span<const ConfigurationSample> samples,
                                               std::size_t min_division_size = 2) {
    struct Raw {
        std::vector<std::size_t> indices;
        std::vector<PathStep> path;
    };

    auto subtree_indices = [&](auto&& self, int node) -> std::vector<std::size_t> {
        const auto& nd = tree.nodes()[static_cast<std::size_t>(node)];
        if (nd.is_leaf()) return tree.leaf_samples(node);
        auto left = self(self, nd.left);
        auto right = self(self, nd.right);
        left.insert(left.end(), right.begin(), right.end());
        std::sort(left.begin(), left.end());
        return left;
    };

    auto collect = [&](auto&& self, int node, std::vector<PathStep> path) -> std::vector<Raw> {
        const auto& nd = tree.nodes()[static_cast<std::size_t>(node)];
        if (nd.is_leaf()) return {Raw{tree.leaf_samples(node), std::move(path)}};

        auto left_path = path;
        left_path.push_back({nd.split_option, nd.split_threshold, true});
        auto right_path = path;
        right_path.push_back({nd.split_option, nd.split_threshold, false});

        auto result = self(self, nd.left, std::move(left_path));
        auto right = self(self, nd.right, std::move(right_path));
        result.insert(result.end(), std::make_move_iterator(right.begin()),
                      std::make_move_iterator(right.end()));

        const bool undersized = std::any_of(result.begin(), result.end(), [&](const Raw& r) {
            return r.indices.size() < min_division_size;
        });
        if (undersized) return {Raw{subtree_indices(subtree_indices, node), std::move(path)}};
        return result;
    };

    auto raw = collect(collect, 0, {});
    std::vector<Division> divisions;
    divisions.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        Division d;
        d.id = static_cast<int>(i);
        d.path = std::move(raw[i].path);
        d.samples.reserve(raw[i].indices.size());
        for (std::size_t j : raw[i].indices) d.samples.push_back(samples[j]);
        divisions.push_back(std::move(d));
    }
    return divisions;
}

// Extended Hoeffding bound: epsilon = sqrt(ln(1/delta) / (2h)) with h the
// harmonic mean of the division sample counts.
inline double hoeffding_epsilon(std::span<const std::size_t> division_sizes, double delta) {
    if (division_sizes.empty()) throw std::invalid_argument("hoeffding_epsilon: no divisions");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("hoeffding_epsilon: delta must lie in (0,1)");
    double inv_sum = 0.0;
    for (std::size_t n : division_sizes) {
        if (n == 0) throw std::invalid_argument("hoeffding_epsilon: empty division");
        inv_sum += 1.0 / static_cast<double>(n);
    }
    const double h = static_cast<double>(division_sizes.size()) / inv_sum;
    return std::sqrt(std::log(1.0 / delta) / (2.0 * h));
}

// Upper-level drift test: strict inequality on the importance delta.
inline bool detect_global_drift(double g_new, double g_cur, double epsilon) {
    return (g_new - g_cur) > epsilon;
}

} // namespace dhda

#endif // DHDA_PARTITION_HPP_
