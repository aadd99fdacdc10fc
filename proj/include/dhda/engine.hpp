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

#ifndef DHDA_ENGINE_HPP_
#define DHDA_ENGINE_HPP_

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhda/adwin.hpp"
#include "dhda/hashing.hpp"
#include "dhda/local_models.hpp"
#include "dhda/partition.hpp"
#include "dhda/rng.hpp"
#include "dhda/types.hpp"

namespace dhda {

enum class ActionKind { Init, Global, LocalDrift, Retrain, Incremental, None };

inline const char* to_string(ActionKind k) {
    switch (k) {
        case ActionKind::Init: return "init";
        case ActionKind::Global: return "global";
        case ActionKind::LocalDrift: return "local_drift";
        case ActionKind::Retrain: return "retrain";
        case ActionKind::Incremental: return "incremental";
        default: return "none";
    }
}

enum class MaintenanceAction { Incremental, Retrain };

struct DivisionAction {
    int division = -1; // -1 for whole-engine events
    ActionKind kind = ActionKind::None;
};

struct TimestepReport {
    std::int64_t timestep = 0;
    double delta_g = 0.0;
    double epsilon = 0.0;
    bool global_adaptation = false;
    std::vector<DivisionAction> actions;
    std::vector<DetectorState> detector_states; // per division, after the step
    double adapt_seconds = 0.0;
    ArrivalIndex max_ingested_arrival = -1;
};

struct EngineConfig {
    int depth = 1;        // CART depth d for divisions
    double delta = 0.05;  // significance level of the extended Hoeffding bound
    int alpha = 3;        // full-retrain period of the hybrid maintainer
    LocalModelConfig local;
    RouterConfig router;
    AdwinConfig adwin;
    std::uint64_t seed = 1;
    bool disable_upper = false;  // NU: no global drift detection/adaptation
    bool disable_lower = false;  // NL: no local drift detection/adaptation
    bool disable_hybrid = false; // NH: no maintenance between drifts
    std::optional<std::size_t> window_capacity; // q; unbounded when absent
    std::size_t min_division_size = 2;
    ImportanceMode importance_mode = ImportanceMode::VarianceFraction;
};

// The dually hierarchical engine. The upper level compares the total
// importance of a candidate tree, retrained on the global window every
// timestep, against the accepted tree's importance under the extended
// Hoeffding bound; exceeding it triggers redividing and full retraining.
// The lower level runs one ADWIN detector per division over that model's
// prediction errors and adapts drifting divisions independently. Between
// drifts a hybrid maintainer alternates incremental updates with a full
// retrain every alpha data-bearing timesteps.
class DhdaEngine {
  public:
    explicit DhdaEngine(EngineConfig config) : config_(config), rng_(mix_seed(config.seed, 0xd81a)) {
        if (config.depth < 1) throw std::invalid_argument("DhdaEngine: depth must be >= 1");
        if (config.alpha < 1) throw std::invalid_argument("DhdaEngine: alpha must be >= 1");
        if (!(config.delta > 0.0 && config.delta < 1.0))
            throw std::invalid_argument("DhdaEngine: delta must lie in (0,1)");
        if (config.min_division_size < 2)
            throw std::invalid_argument("DhdaEngine: min_division_size must be >= 2");
        if (config.window_capacity) global_window_ = SlidingWindow(*config.window_capacity);
    }

    TimestepReport initialize(const Batch& first) {
        if (initialized_) throw std::logic_error("DhdaEngine: already initialized");
        if (first.samples.size() < config_.min_division_size)
            throw std::invalid_argument(
                "DhdaEngine: first batch must hold at least " +
                std::to_string(config_.min_division_size) + " samples to seed one division");
        const auto start = std::chrono::steady_clock::now();

        global_window_.append(first);
        arity_ = first.arity();

        auto samples = global_window_.to_vector();
        accepted_tree_ = train_cart(samples, config_.depth);
        accepted_g_ = accepted_tree_->total_importance(config_.importance_mode);
        candidate_g_ = accepted_g_;

        rebuild_partition(*accepted_tree_, samples);
        retrain_router();

        initialized_ = true;
        last_timestep_ = first.timestep;

        TimestepReport report;
        report.timestep = first.timestep;
        report.epsilon = current_epsilon();
        for (const auto& unit : locals_) {
            report.actions.push_back({unit.division_id, ActionKind::Init});
            report.detector_states.push_back(unit.detector.state());
        }
        report.max_ingested_arrival = global_window_.newest_arrival();
        report.adapt_seconds = seconds_since(start);
        return report;
    }

    TimestepReport observe_batch(const Batch& batch) {
        if (!initialized_) throw std::logic_error("DhdaEngine: observe_batch before initialize");
        if (batch.timestep <= last_timestep_)
            throw std::invalid_argument("DhdaEngine: timesteps must be strictly increasing");
        if (batch.samples.empty()) throw std::invalid_argument("DhdaEngine: empty batch");
        if (batch.arity() != arity_)
            throw std::invalid_argument("DhdaEngine: batch arity mismatch");
        const auto start = std::chrono::steady_clock::now();

        TimestepReport report;
        report.timestep = batch.timestep;

        // 1. extend the global window, retrain the candidate tree
        global_window_.append(batch);
        if (config_.window_capacity) {
            const ArrivalIndex oldest = global_window_.oldest_arrival();
            for (auto& unit : locals_) unit.window.discard_before(oldest);
        }
        auto samples = global_window_.to_vector();
        candidate_tree_ = train_cart(samples, config_.depth);
        candidate_g_ = candidate_tree_->total_importance(config_.importance_mode);

        // 2. assign new samples by the accepted partition, refresh the router
        std::vector<std::vector<ConfigurationSample>> fresh(locals_.size());
        for (const auto& s : batch.samples) {
            const int id = assign_by_paths(s.features);
            locals_[static_cast<std::size_t>(id)].window.append(s);
            fresh[static_cast<std::size_t>(id)].push_back(s);
        }
        retrain_router();

        // 3. upper level: importance delta against the extended Hoeffding bound
        report.epsilon = current_epsilon();
        report.delta_g = candidate_g_ - accepted_g_;
        if (!config_.disable_upper &&
            detect_global_drift(candidate_g_, accepted_g_, report.epsilon)) {
            accepted_tree_ = candidate_tree_;
            accepted_g_ = candidate_g_;
            rebuild_partition(*accepted_tree_, samples);
            retrain_router();
            report.global_adaptation = true;
            report.actions.push_back({-1, ActionKind::Global});
        } else {
            // 4. lower level: per-division detection and asynchronous adaptation
            std::vector<bool> drifted(locals_.size(), false);
            if (!config_.disable_lower) {
                for (std::size_t i = 0; i < locals_.size(); ++i) {
                    if (fresh[i].empty()) continue;
                    auto& unit = locals_[i];
                    for (const auto& s : fresh[i]) {
                        if (!(s.performance > 0.0))
                            throw std::invalid_argument(
                                "DhdaEngine: performance must be positive for error tracking");
                        const double err =
                            std::abs(s.performance - unit.model.predict(s.features)) / s.performance;
                        unit.detector.observe(err, s.arrival_index);
                    }
                    unit.detector.finish_batch();
                    if (auto warn = unit.detector.warning_arrival())
                        unit.window.set_marker("warning", *warn);
                    if (unit.detector.state() == DetectorState::Drift) {
                        adapt_local(unit);
                        drifted[i] = true;
                        report.actions.push_back({unit.division_id, ActionKind::LocalDrift});
                    }
                }
            }

            // 5. hybrid maintenance on the divisions that saw data and no drift
            if (!config_.disable_hybrid) {
                for (std::size_t i = 0; i < locals_.size(); ++i) {
                    if (fresh[i].empty() || drifted[i]) continue;
                    auto& unit = locals_[i];
                    ++unit.t_prime;
                    if (maintenance_decision(unit.t_prime, config_.alpha) ==
                        MaintenanceAction::Incremental) {
                        unit.model.update(fresh[i]);
                        report.actions.push_back({unit.division_id, ActionKind::Incremental});
                    } else {
                        unit.model = LocalModel::train(unit.window.to_vector(), config_.local,
                                                       rng_.next_u64());
                        report.actions.push_back({unit.division_id, ActionKind::Retrain});
                    }
                }
            }
        }

        for (const auto& unit : locals_) report.detector_states.push_back(unit.detector.state());
        report.max_ingested_arrival = batch.samples.back().arrival_index;
        last_timestep_ = batch.timestep;
        report.adapt_seconds = seconds_since(start);
        return report;
    }

    // Routes through the classifier and answers from that division's model;
    // queryable between any two observe_batch calls.
    double predict(Features x) const {
        if (!initialized_) throw std::logic_error("DhdaEngine: predict before initialize");
        const int id = router_->route(x);
        return locals_[static_cast<std::size_t>(id)].model.predict(x);
    }

    // Retrain iff t' is a multiple of alpha.
    static MaintenanceAction maintenance_decision(int t_prime, int alpha) {
        if (alpha < 1) throw std::invalid_argument("maintenance_decision: alpha must be >= 1");
        if (t_prime < 1) throw std::invalid_argument("maintenance_decision: t_prime must be >= 1");
        return t_prime % alpha == 0 ? MaintenanceAction::Retrain : MaintenanceAction::Incremental;
    }

    bool initialized() const { return initialized_; }
    std::size_t division_count() const { return locals_.size(); }
    const SlidingWindow& global_window() const { return global_window_; }
    const SlidingWindow& division_window(std::size_t i) const { return locals_[i].window; }
    DetectorState detector_state(std::size_t i) const { return locals_[i].detector.state(); }
    int division_t_prime(std::size_t i) const { return locals_[i].t_prime; }
    double accepted_importance() const { return accepted_g_; }
    const EngineConfig& config() const { return config_; }

    std::uint64_t model_fingerprint(std::size_t i) const { return locals_[i].model.fingerprint(); }

    // Stable hash of all model parameters plus window arrival indices.
    std::uint64_t fingerprint() const {
        Fingerprint fp;
        fp.add(locals_.size());
        for (const auto& unit : locals_) {
            fp.add(unit.model.fingerprint());
            unit.window.add_to(fp);
            fp.add(static_cast<std::int64_t>(unit.t_prime));
        }
        global_window_.add_to(fp);
        if (router_) fp.add(router_->fingerprint());
        if (accepted_tree_) accepted_tree_->add_to(fp);
        return fp.value();
    }

  private:
    struct LocalUnit {
        int division_id = 0;
        LocalModel model;
        SlidingWindow window;
        AdwinDetector detector;
        int t_prime = 0;

        LocalUnit(int id, LocalModel m, SlidingWindow w, AdwinDetector d)
            : division_id(id), model(std::move(m)), window(std::move(w)), detector(std::move(d)) {}
    };

    static double seconds_since(std::chrono::steady_clock::time_point start) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }

    void rebuild_partition(const RegressionTree& tree,
                           std::span<const ConfigurationSample> samples) {
        auto divisions = extract_divisions(tree, samples, config_.min_division_size);
        division_paths_.clear();
        locals_.clear();
        for (auto& d : divisions) {
            division_paths_.push_back(d.path);
            SlidingWindow window;
            for (const auto& s : d.samples) window.append(s);
            LocalModel model = LocalModel::train(d.samples, config_.local, rng_.next_u64());
            locals_.emplace_back(d.id, std::move(model), std::move(window),
                                 AdwinDetector(config_.adwin));
        }
    }

    void retrain_router() {
        std::vector<RouterClassifier::Example> examples;
        for (const auto& unit : locals_)
            for (const auto& s : unit.window.samples()) examples.push_back({&s, unit.division_id});
        router_ = RouterClassifier::train(examples, config_.router, rng_.next_u64());
    }

    int assign_by_paths(Features x) const {
        for (std::size_t i = 0; i < division_paths_.size(); ++i) {
            bool match = true;
            for (const auto& step : division_paths_[i])
                if (!step.matches(x)) {
                    match = false;
                    break;
                }
            if (match) return static_cast<int>(i);
        }
        throw std::logic_error("DhdaEngine: sample matched no division path");
    }

    double current_epsilon() const {
        std::vector<std::size_t> sizes;
        sizes.reserve(locals_.size());
        for (const auto& unit : locals_) sizes.push_back(unit.window.size());
        return hoeffding_epsilon(sizes, config_.delta);
    }

    void adapt_local(LocalUnit& unit) {
        auto pruned = prune_on_drift(unit.window, unit.detector);
        // a division must stay trainable: retain at least the newest
        // min_division_size samples even if the warning cutoff is later
        if (pruned.window.size() < config_.min_division_size) {
            const auto& all = unit.window.samples();
            const ArrivalIndex cutoff =
                all[all.size() - config_.min_division_size].arrival_index;
            pruned.cutoff = cutoff;
            pruned.window = window_discard_before(unit.window, cutoff);
            pruned.discarded.clear();
            for (const auto& s : all)
                if (s.arrival_index < cutoff) pruned.discarded.push_back(s.arrival_index);
        }
        global_window_.remove_arrivals(pruned.discarded);
        unit.window = std::move(pruned.window);
        unit.model = LocalModel::train(unit.window.to_vector(), config_.local, rng_.next_u64());
        unit.detector.reset();
        unit.t_prime = 0;
    }

    EngineConfig config_;
    SplitMix64 rng_;
    bool initialized_ = false;
    std::int64_t last_timestep_ = -1;
    std::size_t arity_ = 0;
    SlidingWindow global_window_;
    std::optional<RegressionTree> accepted_tree_;
    std::optional<RegressionTree> candidate_tree_;
    double accepted_g_ = 0.0;
    double candidate_g_ = 0.0;
    std::vector<std::vector<PathStep>> division_paths_;
    std::optional<RouterClassifier> router_;
    std::vector<LocalUnit> locals_;
};

} // namespace dhda

#endif // DHDA_ENGINE_HPP_
