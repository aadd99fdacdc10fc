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

#ifndef DHDA_LOCAL_MODELS_HPP_
#define DHDA_LOCAL_MODELS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dhda/hashing.hpp"
#include "dhda/partition.hpp"
#include "dhda/rng.hpp"
#include "dhda/types.hpp"

namespace dhda {

enum class LocalModelKind { RandomForest, KNearestNeighbors, LinearRegression };

inline const char* to_string(LocalModelKind k) {
    switch (k) {
        case LocalModelKind::RandomForest: return "rf";
        case LocalModelKind::KNearestNeighbors: return "knn";
        default: return "lr";
    }
}

struct LocalModelConfig {
    LocalModelKind kind = LocalModelKind::RandomForest;
    // random forest
    int rf_trees = 20;
    bool rf_bootstrap = true;
    int rf_mtry = -1;     // -1: floor(sqrt(arity)); 0: all options
    int rf_max_depth = 64;
    std::size_t rf_min_leaf = 1;
    double rf_update_fraction = 1.0 / 3.0; // fraction of trees refit per incremental update
    // k-nearest neighbors
    int knn_k = 5;
    // linear regression
    double lr_ridge = 0.0; // fallback regularization when X^T X is singular
};

namespace detail {

// Gauss-Jordan inverse with partial pivoting for the small dense systems of
// the recursive-least-squares model. Falls back to a ridge-adjusted matrix
// when singular.
inline std::vector<double> invert_spd(std::vector<double> a, std::size_t dim, double ridge) {
    double max_diag = 0.0;
    for (std::size_t i = 0; i < dim; ++i) max_diag = std::max(max_diag, std::abs(a[i * dim + i]));
    const double tol = std::max(max_diag, 1.0) * 1e-12;

    for (int attempt = 0; attempt < 2; ++attempt) {
        std::vector<double> m = a;
        std::vector<double> inv(dim * dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) inv[i * dim + i] = 1.0;

        bool ok = true;
        for (std::size_t col = 0; col < dim && ok; ++col) {
            std::size_t pivot = col;
            for (std::size_t r = col + 1; r < dim; ++r)
                if (std::abs(m[r * dim + col]) > std::abs(m[pivot * dim + col])) pivot = r;
            if (std::abs(m[pivot * dim + col]) < tol) {
                ok = false;
                break;
            }
            if (pivot != col) {
                for (std::size_t c = 0; c < dim; ++c) {
                    std::swap(m[pivot * dim + c], m[col * dim + c]);
                    std::swap(inv[pivot * dim + c], inv[col * dim + c]);
                }
            }
            const double d = m[col * dim + col];
            for (std::size_t c = 0; c < dim; ++c) {
                m[col * dim + c] /= d;
                inv[col * dim + c] /= d;
            }
            for (std::size_t r = 0; r < dim; ++r) {
                if (r == col) continue;
                const double f = m[r * dim + col];
                if (f == 0.0) continue;
                for (std::size_t c = 0; c < dim; ++c) {
                    m[r * dim + c] -= f * m[col * dim + c];
                    inv[r * dim + c] -= f * inv[col * dim + c];
                }
            }
        }
        if (ok) return inv;
        const double lambda = std::max(ridge, std::max(max_diag, 1.0) * 1e-10);
        for (std::size_t i = 0; i < dim; ++i) a[i * dim + i] += lambda;
    }
    throw std::runtime_error("invert_spd: matrix is numerically singular");
}

} // namespace detail

// Ordinary least squares fit maintained online by recursive least squares.
class RlsRegressor {
  public:
    RlsRegressor(std::span<const ConfigurationSample> samples, const LocalModelConfig& config)
        : arity_(samples.front().features.size()) {
        const std::size_t dim = arity_ + 1;
        std::vector<double> xtx(dim * dim, 0.0);
        std::vector<double> xty(dim, 0.0);
        std::vector<double> row(dim);
        for (const auto& s : samples) {
            augment(s.features, row);
            for (std::size_t i = 0; i < dim; ++i) {
                xty[i] += row[i] * s.performance;
                for (std::size_t j = 0; j < dim; ++j) xtx[i * dim + j] += row[i] * row[j];
            }
        }
        p_ = detail::invert_spd(std::move(xtx), dim, config.lr_ridge);
        theta_.assign(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) theta_[i] += p_[i * dim + j] * xty[j];
        count_ = samples.size();
    }

    void update(std::span<const ConfigurationSample> new_samples) {
        const std::size_t dim = arity_ + 1;
        std::vector<double> x(dim), px(dim), xp(dim);
        for (const auto& s : new_samples) {
            check_arity(s.features.size());
            augment(s.features, x);
            // k = P x / (1 + x' P x); theta += k (y - x'theta); P -= k x' P
            double denom = 1.0;
            for (std::size_t i = 0; i < dim; ++i) {
                px[i] = 0.0;
                for (std::size_t j = 0; j < dim; ++j) px[i] += p_[i * dim + j] * x[j];
            }
            for (std::size_t i = 0; i < dim; ++i) denom += x[i] * px[i];
            double residual = s.performance;
            for (std::size_t i = 0; i < dim; ++i) residual -= theta_[i] * x[i];
            for (std::size_t i = 0; i < dim; ++i) {
                xp[i] = 0.0;
                for (std::size_t j = 0; j < dim; ++j) xp[i] += x[j] * p_[j * dim + i];
            }
            for (std::size_t i = 0; i < dim; ++i) {
                const double k = px[i] / denom;
                theta_[i] += k * residual;
                for (std::size_t j = 0; j < dim; ++j) p_[i * dim + j] -= k * xp[j];
            }
            ++count_;
        }
    }

    double predict(Features x) const {
        check_arity(x.size());
        double y = theta_[0];
        for (std::size_t i = 0; i < arity_; ++i) y += theta_[i + 1] * x[i];
        return y;
    }

    std::size_t arity() const { return arity_; }
    std::size_t count() const { return count_; }
    double intercept() const { return theta_[0]; }
    std::span<const double> coefficients() const { return {theta_.data() + 1, arity_}; }

    void add_to(Fingerprint& fp) const {
        fp.add(std::string_view("lr"));
        for (double v : theta_) fp.add(v);
    }

  private:
    void augment(std::span<const double> features, std::vector<double>& row) const {
        check_arity(features.size());
        row[0] = 1.0;
        for (std::size_t i = 0; i < arity_; ++i) row[i + 1] = features[i];
    }
    void check_arity(std::size_t got) const {
        if (got != arity_)
            throw std::invalid_argument("RlsRegressor: arity mismatch, expected " +
                                        std::to_string(arity_) + ", got " + std::to_string(got));
    }

    std::size_t arity_;
    std::vector<double> theta_; // [intercept, coefficients...]
    std::vector<double> p_;     // (X'X)^-1, kept up to date by the RLS step
    std::size_t count_ = 0;
};

// Distance-weighted-free kNN regression over min-max scaled features; the
// scaling statistics are frozen at training time.
class KnnRegressor {
  public:
    KnnRegressor(std::span<const ConfigurationSample> samples, const LocalModelConfig& config)
        : arity_(samples.front().features.size()), k_(config.knn_k) {
        if (k_ < 1) throw std::invalid_argument("KnnRegressor: k must be >= 1");
        mins_.assign(arity_, std::numeric_limits<double>::infinity());
        maxs_.assign(arity_, -std::numeric_limits<double>::infinity());
        for (const auto& s : samples) {
            for (std::size_t i = 0; i < arity_; ++i) {
                mins_[i] = std::min(mins_[i], s.features[i]);
                maxs_[i] = std::max(maxs_[i], s.features[i]);
            }
        }
        for (const auto& s : samples) store(s);
    }

    void update(std::span<const ConfigurationSample> new_samples) {
        for (const auto& s : new_samples) {
            check_arity(s.features.size());
            store(s);
        }
    }

    double predict(Features x) const {
        check_arity(x.size());
        std::vector<double> q(arity_);
        scale(x, q);
        const std::size_t n = scaled_.size();
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), n);
        std::vector<std::pair<double, std::size_t>> dist(n);
        for (std::size_t i = 0; i < n; ++i) {
            double d2 = 0.0;
            for (std::size_t j = 0; j < arity_; ++j) {
                const double d = scaled_[i][j] - q[j];
                d2 += d * d;
            }
            dist[i] = {d2, i};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        double mean = 0.0;
        for (std::size_t i = 0; i < k; ++i) mean += targets_[dist[i].second];
        return mean / static_cast<double>(k);
    }

    std::size_t arity() const { return arity_; }
    std::size_t count() const { return scaled_.size(); }

    void add_to(Fingerprint& fp) const {
        fp.add(std::string_view("knn"));
        fp.add(scaled_.size());
        for (std::size_t i = 0; i < scaled_.size(); ++i) {
            for (double v : scaled_[i]) fp.add(v);
            fp.add(targets_[i]);
        }
    }

  private:
    void store(const ConfigurationSample& s) {
        std::vector<double> q(arity_);
        scale(s.features, q);
        scaled_.push_back(std::move(q));
        targets_.push_back(s.performance);
    }
    void scale(std::span<const double> x, std::vector<double>& out) const {
        for (std::size_t i = 0; i < arity_; ++i) {
            const double range = maxs_[i] - mins_[i];
            out[i] = range > 0.0 ? (x[i] - mins_[i]) / range : 0.0;
        }
    }
    void check_arity(std::size_t got) const {
        if (got != arity_)
            throw std::invalid_argument("KnnRegressor: arity mismatch, expected " +
                                        std::to_string(arity_) + ", got " + std::to_string(got));
    }

    std::size_t arity_;
    int k_;
    std::vector<double> mins_, maxs_;
    std::vector<std::vector<double>> scaled_;
    std::vector<double> targets_;
};

// Bagged regression forest. Each tree remembers its training subset so an
// incremental update can refit a random fraction of trees on that subset
// augmented with the newly arrived samples; nothing is discarded.
class RfRegressor {
  public:
    RfRegressor(std::span<const ConfigurationSample> samples, const LocalModelConfig& config,
                std::uint64_t seed)
        : config_(config), arity_(samples.front().features.size()), rng_(seed) {
        if (config.rf_trees < 1) throw std::invalid_argument("RfRegressor: need >= 1 tree");
        samples_.assign(samples.begin(), samples.end());
        trees_.resize(static_cast<std::size_t>(config.rf_trees));
        for (auto& t : trees_) {
            t.bag = make_bag(samples_.size());
            refit(t);
        }
    }

    void update(std::span<const ConfigurationSample> new_samples) {
        if (new_samples.empty()) return;
        const std::size_t base = samples_.size();
        for (const auto& s : new_samples) {
            check_arity(s.features.size());
            samples_.push_back(s);
        }
        const auto refit_count = std::max<std::size_t>(
            1, static_cast<std::size_t>(
                   std::llround(static_cast<double>(trees_.size()) * config_.rf_update_fraction)));
        std::vector<std::size_t> order(trees_.size());
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = 0; i < refit_count; ++i) {
            const std::size_t j = i + rng_.next_index(order.size() - i);
            std::swap(order[i], order[j]);
        }
        for (std::size_t i = 0; i < refit_count; ++i) {
            auto& t = trees_[order[i]];
            for (std::size_t s = base; s < samples_.size(); ++s) t.bag.push_back(s);
            refit(t);
        }
    }

    double predict(Features x) const {
        check_arity(x.size());
        double sum = 0.0;
        for (const auto& t : trees_) sum += t.tree->predict(x);
        return sum / static_cast<double>(trees_.size());
    }

    std::vector<double> tree_predictions(Features x) const {
        check_arity(x.size());
        std::vector<double> out;
        out.reserve(trees_.size());
        for (const auto& t : trees_) out.push_back(t.tree->predict(x));
        return out;
    }

    std::size_t arity() const { return arity_; }
    std::size_t count() const { return samples_.size(); }
    std::size_t tree_count() const { return trees_.size(); }

    void add_to(Fingerprint& fp) const {
        fp.add(std::string_view("rf"));
        fp.add(trees_.size());
        for (const auto& t : trees_) t.tree->add_to(fp);
    }

  private:
    struct BaggedTree {
        std::vector<std::size_t> bag;
        std::optional<RegressionTree> tree;
    };

    std::vector<std::size_t> make_bag(std::size_t n) {
        std::vector<std::size_t> bag(n);
        if (config_.rf_bootstrap) {
            for (auto& b : bag) b = rng_.next_index(n);
        } else {
            std::iota(bag.begin(), bag.end(), 0);
        }
        return bag;
    }

    void refit(BaggedTree& t) {
        TreeGrowth growth;
        growth.max_depth = config_.rf_max_depth;
        growth.min_leaf = config_.rf_min_leaf;
        growth.mtry = config_.rf_mtry < 0
                          ? std::max(1, static_cast<int>(std::sqrt(static_cast<double>(arity_))))
                          : config_.rf_mtry;
        growth.seed = rng_.next_u64();
        t.tree = RegressionTree::train(samples_, t.bag, growth);
    }

    void check_arity(std::size_t got) const {
        if (got != arity_)
            throw std::invalid_argument("RfRegressor: arity mismatch, expected " +
                                        std::to_string(arity_) + ", got " + std::to_string(got));
    }

    LocalModelConfig config_;
    std::size_t arity_;
    SplitMix64 rng_;
    std::vector<ConfigurationSample> samples_;
    std::vector<BaggedTree> trees_;
};

// One division's regressor: train / incremental-update / predict behind a
// kind switch chosen at configuration time.
class LocalModel {
  public:
    static LocalModel train(std::span<const ConfigurationSample> samples,
                            const LocalModelConfig& config, std::uint64_t seed) {
        if (samples.size() < 2)
            throw std::invalid_argument("LocalModel: need at least 2 training samples, got " +
                                        std::to_string(samples.size()));
        LocalModel m;
        m.kind_ = config.kind;
        switch (config.kind) {
            case LocalModelKind::RandomForest:
                m.impl_.emplace<RfRegressor>(samples, config, seed);
                break;
            case LocalModelKind::KNearestNeighbors:
                m.impl_.emplace<KnnRegressor>(samples, config);
                break;
            case LocalModelKind::LinearRegression:
                m.impl_.emplace<RlsRegressor>(samples, config);
                break;
        }
        return m;
    }

    void update(std::span<const ConfigurationSample> new_samples) {
        if (new_samples.empty()) return; // identity
        visit([&](auto& impl) { impl.update(new_samples); });
    }

    double predict(Features x) const {
        return visit([&](const auto& impl) { return impl.predict(x); });
    }

    LocalModelKind kind() const { return kind_; }
    std::size_t arity() const {
        return visit([](const auto& impl) { return impl.arity(); });
    }
    std::size_t trained_on_count() const {
        return visit([](const auto& impl) { return impl.count(); });
    }

    std::uint64_t fingerprint() const {
        Fingerprint fp;
        visit([&](const auto& impl) { impl.add_to(fp); });
        return fp.value();
    }

    const RfRegressor& as_forest() const { return std::get<RfRegressor>(impl_); }
    const KnnRegressor& as_knn() const { return std::get<KnnRegressor>(impl_); }
    const RlsRegressor& as_linear() const { return std::get<RlsRegressor>(impl_); }

  private:
    LocalModel() = default;

    template <typename F>
    auto visit(F&& f) -> decltype(f(std::declval<RfRegressor&>())) {
        using R = decltype(f(std::declval<RfRegressor&>()));
        return std::visit(
            [&](auto& impl) -> R {
                if constexpr (std::is_same_v<std::decay_t<decltype(impl)>, std::monostate>)
                    throw std::logic_error("LocalModel: not trained");
                else
                    return f(impl);
            },
            impl_);
    }
    template <typename F>
    auto visit(F&& f) const -> decltype(f(std::declval<const RfRegressor&>())) {
        using R = decltype(f(std::declval<const RfRegressor&>()));
        return std::visit(
            [&](const auto& impl) -> R {
                if constexpr (std::is_same_v<std::decay_t<decltype(impl)>, std::monostate>)
                    throw std::logic_error("LocalModel: not trained");
                else
                    return f(impl);
            },
            impl_);
    }

    LocalModelKind kind_ = LocalModelKind::RandomForest;
    std::variant<std::monostate, RfRegressor, KnnRegressor, RlsRegressor> impl_;
};

inline LocalModel train_local(std::span<const ConfigurationSample> samples,
                              const LocalModelConfig& config, std::uint64_t seed) {
    return LocalModel::train(samples, config, seed);
}

inline void update_local(LocalModel& model, std::span<const ConfigurationSample> new_samples) {
    model.update(new_samples);
}

inline double predict_local(const LocalModel& model, Features x) { return model.predict(x); }

// ---------------------------------------------------------------------------
// Router: random forest classifier over (features -> division id)

struct RouterConfig {
    int trees = 20;
    bool bootstrap = true;
    int mtry = -1; // -1: floor(sqrt(arity))
    int max_depth = 64;
};

class RouterClassifier {
  public:
    struct Example {
        const ConfigurationSample* sample;
        int division;
    };

    static RouterClassifier train(std::span<const Example> examples, const RouterConfig& config,
                                  std::uint64_t seed) {
        if (examples.empty()) throw std::invalid_argument("RouterClassifier: no training examples");
        RouterClassifier router;
        router.arity_ = examples.front().sample->features.size();
        for (const auto& e : examples)
            if (std::find(router.classes_.begin(), router.classes_.end(), e.division) ==
                router.classes_.end())
                router.classes_.push_back(e.division);
        std::sort(router.classes_.begin(), router.classes_.end());

        std::vector<std::size_t> labels(examples.size());
        for (std::size_t i = 0; i < examples.size(); ++i) {
            const auto it =
                std::lower_bound(router.classes_.begin(), router.classes_.end(), examples[i].division);
            labels[i] = static_cast<std::size_t>(it - router.classes_.begin());
        }

        SplitMix64 rng(seed);
        router.trees_.resize(static_cast<std::size_t>(std::max(1, config.trees)));
        const int mtry = config.mtry < 0
                             ? std::max(1, static_cast<int>(std::sqrt(static_cast<double>(router.arity_))))
                             : config.mtry;
        for (auto& tree : router.trees_) {
            std::vector<std::size_t> bag(examples.size());
            if (config.bootstrap) {
                for (auto& b : bag) b = rng.next_index(examples.size());
            } else {
                std::iota(bag.begin(), bag.end(), 0);
            }
            tree.grow(examples, labels, router.classes_.size(), std::move(bag), mtry,
                      config.max_depth, rng);
        }
        return router;
    }

    int route(Features x) const {
        if (x.size() != arity_)
            throw std::invalid_argument("RouterClassifier: arity mismatch, expected " +
                                        std::to_string(arity_) + ", got " + std::to_string(x.size()));
        std::vector<std::size_t> votes(classes_.size(), 0);
        for (const auto& tree : trees_) ++votes[tree.classify(x)];
        std::size_t winner = 0;
        for (std::size_t c = 1; c < votes.size(); ++c)
            if (votes[c] > votes[winner]) winner = c;
        return classes_[winner];
    }

    const std::vector<int>& classes() const { return classes_; }
    std::size_t arity() const { return arity_; }

    std::uint64_t fingerprint() const {
        Fingerprint fp;
        fp.add(std::string_view("router"));
        fp.add(trees_.size());
        for (const auto& tree : trees_) {
            fp.add(tree.nodes.size());
            for (const auto& nd : tree.nodes) {
                fp.add(nd.option);
                fp.add(nd.threshold);
                fp.add(nd.label);
            }
        }
        return fp.value();
    }

  private:
    struct Node {
        int option = -1; // -1 marks a leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        std::size_t label = 0;
    };

    struct ClassTree {
        std::vector<Node> nodes;

        void grow(std::span<const Example> examples, const std::vector<std::size_t>& labels,
                  std::size_t n_classes, std::vector<std::size_t> idx, int mtry, int max_depth,
                  SplitMix64& rng) {
            build(examples, labels, n_classes, std::move(idx), 0, mtry, max_depth, rng);
        }

        std::size_t classify(Features x) const {
            int node = 0;
            while (!is_leaf(node)) {
                const auto& nd = nodes[static_cast<std::size_t>(node)];
                node = x[static_cast<std::size_t>(nd.option)] <= nd.threshold ? nd.left : nd.right;
            }
            return nodes[static_cast<std::size_t>(node)].label;
        }

      private:
        bool is_leaf(int node) const { return nodes[static_cast<std::size_t>(node)].option < 0; }

        int build(std::span<const Example> examples, const std::vector<std::size_t>& labels,
                  std::size_t n_classes, std::vector<std::size_t> idx, int depth, int mtry,
                  int max_depth, SplitMix64& rng) {
            const int node_id = static_cast<int>(nodes.size());
            nodes.emplace_back();

            std::vector<std::size_t> counts(n_classes, 0);
            for (std::size_t i : idx) ++counts[labels[i]];
            std::size_t majority = 0;
            for (std::size_t c = 1; c < n_classes; ++c)
                if (counts[c] > counts[majority]) majority = c;
            nodes[static_cast<std::size_t>(node_id)].label = majority;

            const bool pure = counts[majority] == idx.size();
            if (pure || depth >= max_depth || idx.size() < 2) return node_id;

            auto split = best_gini_split(examples, labels, n_classes, idx, counts, mtry, rng);
            if (!split) return node_id;

            std::vector<std::size_t> left_idx, right_idx;
            for (std::size_t i : idx) {
                if (examples[i].sample->features[static_cast<std::size_t>(split->first)] <=
                    split->second)
                    left_idx.push_back(i);
                else
                    right_idx.push_back(i);
            }
            nodes[static_cast<std::size_t>(node_id)].option = split->first;
            nodes[static_cast<std::size_t>(node_id)].threshold = split->second;
            const int left =
                build(examples, labels, n_classes, std::move(left_idx), depth + 1, mtry, max_depth, rng);
            const int right =
                build(examples, labels, n_classes, std::move(right_idx), depth + 1, mtry, max_depth, rng);
            nodes[static_cast<std::size_t>(node_id)].left = left;
            nodes[static_cast<std::size_t>(node_id)].right = right;
            return node_id;
        }

        std::optional<std::pair<int, double>> best_gini_split(
            std::span<const Example> examples, const std::vector<std::size_t>& labels,
            std::size_t n_classes, const std::vector<std::size_t>& idx,
            const std::vector<std::size_t>& counts, int mtry, SplitMix64& rng) {
            const std::size_t arity = examples.front().sample->features.size();
            std::vector<int> options(arity);
            std::iota(options.begin(), options.end(), 0);
            if (mtry > 0 && static_cast<std::size_t>(mtry) < arity) {
                for (int i = 0; i < mtry; ++i) {
                    const std::size_t j = static_cast<std::size_t>(i) +
                                          rng.next_index(options.size() - static_cast<std::size_t>(i));
                    std::swap(options[static_cast<std::size_t>(i)], options[j]);
                }
                options.resize(static_cast<std::size_t>(mtry));
                std::sort(options.begin(), options.end());
            }

            const std::size_t n = idx.size();
            const double parent_score = gini_weighted(counts, n);

            std::optional<std::pair<int, double>> best;
            double best_gain = 0.0;
            std::vector<std::pair<double, std::size_t>> column(n);
            std::vector<std::size_t> left_counts(n_classes);

            for (int option : options) {
                for (std::size_t k = 0; k < n; ++k)
                    column[k] = {examples[idx[k]].sample->features[static_cast<std::size_t>(option)],
                                 labels[idx[k]]};
                std::sort(column.begin(), column.end(),
                          [](const auto& a, const auto& b) { return a.first < b.first; });

                std::fill(left_counts.begin(), left_counts.end(), 0);
                for (std::size_t k = 0; k + 1 < n; ++k) {
                    ++left_counts[column[k].second];
                    if (column[k].first >= column[k + 1].first) continue;
                    const std::size_t n_left = k + 1;
                    const std::size_t n_right = n - n_left;
                    double right_gini = 0.0, left_gini = 0.0;
                    for (std::size_t c = 0; c < n_classes; ++c) {
                        const double lc = static_cast<double>(left_counts[c]);
                        const double rc = static_cast<double>(counts[c] - left_counts[c]);
                        left_gini += lc * lc;
                        right_gini += rc * rc;
                    }
                    // weighted impurity: n_l * gini_l + n_r * gini_r, lower is better
                    const double child_score =
                        static_cast<double>(n_left) - left_gini / static_cast<double>(n_left) +
                        static_cast<double>(n_right) - right_gini / static_cast<double>(n_right);
                    const double gain = parent_score - child_score;
                    if (gain > best_gain) {
                        best_gain = gain;
                        best = {option, 0.5 * (column[k].first + column[k + 1].first)};
                    }
                }
            }
            return best;
        }

        static double gini_weighted(const std::vector<std::size_t>& counts, std::size_t n) {
            double sq = 0.0;
            for (std::size_t c : counts) {
                const double v = static_cast<double>(c);
                sq += v * v;
            }
            return static_cast<double>(n) - sq / static_cast<double>(n);
        }
    };

    std::vector<ClassTree> trees_;
    std::vector<int> classes_;
    std::size_t arity_ = 0;
};

// Trains the router from the divisions' current sample populations.
inline RouterClassifier train_router(std::span<const Division> divisions,
                                     const RouterConfig& config, std::uint64_t seed) {
    if (divisions.empty()) throw std::invalid_argument("train_router: no divisions");
    std::vector<RouterClassifier::Example> examples;
    for (const auto& d : divisions) {
        if (d.samples.empty()) throw std::invalid_argument("train_router: empty division");
        for (const auto& s : d.samples) examples.push_back({&s, d.id});
    }
    return RouterClassifier::train(examples, config, seed);
}

inline int route(const RouterClassifier& router, Features x) { return router.route(x); }

} // namespace dhda

#endif // DHDA_LOCAL_MODELS_HPP_
