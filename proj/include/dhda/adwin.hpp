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

#ifndef DHDA_ADWIN_HPP_
#define DHDA_ADWIN_HPP_

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dhda/types.hpp"

namespace dhda {

enum class DetectorState { Stable, Warning, Drift };

inline const char* to_string(DetectorState s) {
    switch (s) {
        case DetectorState::Stable: return "stable";
        case DetectorState::Warning: return "warning";
        default: return "drift";
    }
}

struct AdwinConfig {
    double warning_delta = 0.10; // relaxed 90% confidence
    double drift_delta = 0.01;   // strict 99% confidence
    int buckets_per_level = 5;   // exponential-histogram arity M
    std::size_t min_window = 16; // observations before cuts are tested
    std::size_t min_sub_window = 5;
    std::size_t check_interval = 1;
};

// Adaptive-windowing monitor over a per-division error stream. The
// exponential histogram summarizes the observed errors in O(log n) buckets;
// every admissible cut between an older and a newer sub-window is tested at
// two confidences. A trace filter admits a cut only when the newer mean
// exceeds the older one, so improving error never counts as drift. Warning
// fires at the relaxed confidence; Drift fires at the strict confidence
// only once a warning has already been flagged.
class AdwinDetector {
  public:
    explicit AdwinDetector(AdwinConfig config = {}) : config_(config) {
        if (!(config.warning_delta > 0.0 && config.warning_delta < 1.0) ||
            !(config.drift_delta > 0.0 && config.drift_delta < 1.0) ||
            config.drift_delta > config.warning_delta)
            throw std::invalid_argument("AdwinDetector: need 0 < drift_delta <= warning_delta < 1");
        if (config.buckets_per_level < 1)
            throw std::invalid_argument("AdwinDetector: buckets_per_level must be >= 1");
        if (config.min_sub_window < 1 || config.check_interval < 1)
            throw std::invalid_argument("AdwinDetector: min_sub_window and check_interval must be >= 1");
    }

    DetectorState observe(double error, ArrivalIndex arrival) {
        if (!std::isfinite(error) || error < 0.0)
            throw std::invalid_argument("AdwinDetector: error must be finite and nonnegative, got " +
                                        std::to_string(error));
        if (last_arrival_ && arrival <= *last_arrival_)
            throw std::invalid_argument("AdwinDetector: arrival indices must be strictly increasing");
        last_arrival_ = arrival;

        insert(error, arrival);
        ++observed_;
        if (state_ == DetectorState::Drift) return state_; // latched until reset

        if (width_ >= config_.min_window && observed_ % config_.check_interval == 0)
            evaluate_cuts(arrival);
        return state_;
    }

    // Clears a Warning that went a whole batch without any cut reaching the
    // warning confidence again.
    void finish_batch() {
        if (state_ == DetectorState::Warning && !warning_supported_) {
            state_ = DetectorState::Stable;
            warning_arrival_.reset();
        }
        warning_supported_ = false;
    }

    void reset() {
        levels_.clear();
        width_ = 0;
        sum_ = 0.0;
        mean_ = 0.0;
        m2_ = 0.0;
        observed_ = 0;
        state_ = DetectorState::Stable;
        warning_arrival_.reset();
        cut_arrival_.reset();
        last_arrival_.reset();
        warning_supported_ = false;
        flagged_older_mean_ = 0.0;
        flagged_newer_mean_ = 0.0;
    }

    DetectorState state() const { return state_; }
    std::optional<ArrivalIndex> warning_arrival() const { return warning_arrival_; }
    std::optional<ArrivalIndex> cut_arrival() const { return cut_arrival_; }

    std::size_t width() const { return width_; }
    double mean() const { return width_ == 0 ? 0.0 : sum_ / static_cast<double>(width_); }
    std::size_t bucket_count() const {
        std::size_t n = 0;
        for (const auto& row : levels_) n += row.size();
        return n;
    }

    // Sub-window means at the most recently flagged cut; the newer mean
    // strictly exceeds the older one for every raised Warning or Drift.
    double flagged_older_mean() const { return flagged_older_mean_; }
    double flagged_newer_mean() const { return flagged_newer_mean_; }

    const AdwinConfig& config() const { return config_; }

  private:
    struct Bucket {
        double sum = 0.0;
        ArrivalIndex first_arrival = 0;
    };

    void insert(double value, ArrivalIndex arrival) {
        if (levels_.empty()) levels_.emplace_back();
        levels_[0].push_back({value, arrival});

        ++width_;
        const double delta = value - mean_;
        mean_ += delta / static_cast<double>(width_);
        m2_ += delta * (value - mean_);
        sum_ += value;

        // cascade merges: a row holds at most M buckets; overflow merges its
        // two oldest into the next level
        for (std::size_t level = 0; level < levels_.size(); ++level) {
            auto& row = levels_[level];
            if (row.size() <= static_cast<std::size_t>(config_.buckets_per_level)) break;
            Bucket oldest = row.front();
            row.pop_front();
            Bucket second = row.front();
            row.pop_front();
            Bucket merged{oldest.sum + second.sum, oldest.first_arrival};
            if (levels_.size() == level + 1) levels_.emplace_back();
            levels_[level + 1].push_back(merged);
        }
    }

    double cut_threshold(std::size_t n0, std::size_t n1, double delta) const {
        const double var = m2_ / static_cast<double>(width_);
        const double msw = static_cast<double>(config_.min_sub_window);
        const double m = 1.0 / (static_cast<double>(n0) - msw + 1.0) +
                         1.0 / (static_cast<double>(n1) - msw + 1.0);
        const double dd = std::log(2.0 * std::log(static_cast<double>(width_)) / delta);
        return std::sqrt(2.0 * m * var * dd) + (2.0 / 3.0) * m * dd;
    }

    void evaluate_cuts(ArrivalIndex arrival) {
        // flatten buckets oldest -> newest
        flat_.clear();
        for (std::size_t level = levels_.size(); level-- > 0;) {
            const auto count = static_cast<std::size_t>(1) << level;
            for (const auto& b : levels_[level]) flat_.push_back({b.sum, b.first_arrival, count});
        }

        const bool was_warning = state_ == DetectorState::Warning;
        bool drift_found = false;
        double best_warn_ratio = 0.0;
        double best_drift_ratio = 0.0;

        std::size_t n0 = 0;
        double s0 = 0.0;
        for (std::size_t i = 0; i + 1 < flat_.size(); ++i) {
            n0 += flat_[i].count;
            s0 += flat_[i].sum;
            const std::size_t n1 = width_ - n0;
            if (n0 < config_.min_sub_window || n1 < config_.min_sub_window) continue;
            const double u0 = s0 / static_cast<double>(n0);
            const double u1 = (sum_ - s0) / static_cast<double>(n1);
            if (u1 <= u0) continue; // trace filter: only degradations matter
            const double diff = u1 - u0;

            const double warn_thr = cut_threshold(n0, n1, config_.warning_delta);
            if (diff > warn_thr) {
                warning_supported_ = true;
                const double ratio = diff / warn_thr;
                if (ratio > best_warn_ratio) {
                    best_warn_ratio = ratio;
                    flagged_older_mean_ = u0;
                    flagged_newer_mean_ = u1;
                }
                const double drift_thr = cut_threshold(n0, n1, config_.drift_delta);
                if (diff > drift_thr) {
                    drift_found = true;
                    const double dratio = diff / drift_thr;
                    if (dratio > best_drift_ratio) {
                        best_drift_ratio = dratio;
                        cut_arrival_ = flat_[i + 1].first_arrival;
                    }
                }
            }
        }

        if (drift_found && was_warning) {
            state_ = DetectorState::Drift;
        } else if (best_warn_ratio > 0.0 && state_ == DetectorState::Stable) {
            state_ = DetectorState::Warning;
            warning_arrival_ = arrival;
        }
    }

    struct FlatBucket {
        double sum;
        ArrivalIndex first_arrival;
        std::size_t count;
    };

    AdwinConfig config_;
    std::vector<std::deque<Bucket>> levels_; // levels_[i]: buckets of 2^i values, oldest first
    std::vector<FlatBucket> flat_;           // scan scratch
    std::size_t width_ = 0;
    double sum_ = 0.0;
    double mean_ = 0.0;
    double m2_ = 0.0; // sum of squared deviations (Welford)
    std::uint64_t observed_ = 0;
    DetectorState state_ = DetectorState::Stable;
    std::optional<ArrivalIndex> warning_arrival_;
    std::optional<ArrivalIndex> cut_arrival_;
    std::optional<ArrivalIndex> last_arrival_;
    bool warning_supported_ = false;
    double flagged_older_mean_ = 0.0;
    double flagged_newer_mean_ = 0.0;
};

inline void detector_reset(AdwinDetector& detector) { detector.reset(); }

struct PruneResult {
    SlidingWindow window;
    std::vector<ArrivalIndex> discarded;
    ArrivalIndex cutoff = 0;
};

// Keeps the timely data: samples at or after the arrival where the latest
// warning was raised. Everything older is out of date; the discarded
// arrivals are reported so the caller can remove the same samples from the
// global window.
inline PruneResult prune_on_drift(const SlidingWindow& window, const AdwinDetector& detector) {
    if (detector.state() != DetectorState::Drift)
        throw std::logic_error("prune_on_drift: detector is not in the Drift state");
    std::optional<ArrivalIndex> cutoff = detector.warning_arrival();
    if (!cutoff) cutoff = detector.cut_arrival(); // degenerate: no surviving warning index
    if (!cutoff) throw std::logic_error("prune_on_drift: detector exposes no prune position");

    PruneResult result;
    result.cutoff = *cutoff;
    for (const auto& s : window.samples())
        if (s.arrival_index < *cutoff) result.discarded.push_back(s.arrival_index);
    result.window = window_discard_before(window, *cutoff);
    return result;
}

} // namespace dhda

#endif // DHDA_ADWIN_HPP_
