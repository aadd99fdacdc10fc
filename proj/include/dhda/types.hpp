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

#ifndef DHDA_TYPES_HPP_
#define DHDA_TYPES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dhda/hashing.hpp"

namespace dhda {

using ArrivalIndex = std::int64_t;
using Features = std::span<const double>;

// One measured configuration: option values plus the performance observed
// for them. arrival_index is the position in the stream, assigned at
// ingestion.
struct ConfigurationSample {
    std::vector<double> features;
    double performance = 0.0;
    ArrivalIndex arrival_index = 0;
};

// A batch of newly measured samples delivered at one timestep.
struct Batch {
    std::vector<ConfigurationSample> samples;
    std::int64_t timestep = 0;

    std::size_t arity() const { return samples.empty() ? 0 : samples.front().features.size(); }
};

// Ordered sample buffer with arrival bookkeeping. Samples are kept in
// strictly increasing arrival order; an optional capacity evicts
// oldest-first. Markers label arrival positions (e.g. where a warning was
// raised) and are dropped together with the samples below them.
class SlidingWindow {
  public:
    SlidingWindow() = default;
    explicit SlidingWindow(std::size_t capacity) : capacity_(capacity) {
        if (capacity == 0) throw std::invalid_argument("SlidingWindow: capacity must be positive");
    }

    void append(const ConfigurationSample& sample) {
        if (!samples_.empty()) {
            if (sample.features.size() != samples_.front().features.size())
                throw std::invalid_argument(
                    "SlidingWindow: arity mismatch, window holds " +
                    std::to_string(samples_.front().features.size()) + " options but sample has " +
                    std::to_string(sample.features.size()));
            if (sample.arrival_index <= samples_.back().arrival_index)
                throw std::invalid_argument("SlidingWindow: arrival indices must be strictly increasing");
        }
        samples_.push_back(sample);
        if (capacity_ && samples_.size() > *capacity_) samples_.pop_front();
    }

    void append(const Batch& batch) {
        for (const auto& s : batch.samples) append(s);
    }

    // Retains exactly the samples with arrival_index >= cutoff; markers below
    // the cutoff are removed. A cutoff beyond the newest sample empties the
    // window, which is legal.
    void discard_before(ArrivalIndex cutoff) {
        while (!samples_.empty() && samples_.front().arrival_index < cutoff) samples_.pop_front();
        for (auto it = markers_.begin(); it != markers_.end();) {
            if (it->second < cutoff)
                it = markers_.erase(it);
            else
                ++it;
        }
    }

    // Removes the samples whose arrival indices appear in `arrivals`
    // (sorted or not). Used to mirror per-division pruning in the global
    // window.
    void remove_arrivals(std::span<const ArrivalIndex> arrivals) {
        if (arrivals.empty()) return;
        std::vector<ArrivalIndex> sorted(arrivals.begin(), arrivals.end());
        std::sort(sorted.begin(), sorted.end());
        auto keep = [&](const ConfigurationSample& s) {
            return !std::binary_search(sorted.begin(), sorted.end(), s.arrival_index);
        };
        std::deque<ConfigurationSample> kept;
        for (auto& s : samples_)
            if (keep(s)) kept.push_back(std::move(s));
        samples_ = std::move(kept);
    }

    void set_marker(const std::string& label, ArrivalIndex arrival) { markers_[label] = arrival; }
    std::optional<ArrivalIndex> marker(const std::string& label) const {
        auto it = markers_.find(label);
        if (it == markers_.end()) return std::nullopt;
        return it->second;
    }
    void clear_markers() { markers_.clear(); }

    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }
    std::optional<std::size_t> capacity() const { return capacity_; }
    const std::deque<ConfigurationSample>& samples() const { return samples_; }
    const ConfigurationSample& operator[](std::size_t i) const { return samples_[i]; }

    ArrivalIndex oldest_arrival() const { return samples_.front().arrival_index; }
    ArrivalIndex newest_arrival() const { return samples_.back().arrival_index; }

    std::vector<ConfigurationSample> to_vector() const {
        return {samples_.begin(), samples_.end()};
    }

    void add_to(Fingerprint& fp) const {
        fp.add(samples_.size());
        for (const auto& s : samples_) fp.add(s.arrival_index);
    }

  private:
    std::deque<ConfigurationSample> samples_;
    std::optional<std::size_t> capacity_;
    std::map<std::string, ArrivalIndex> markers_;
};

inline SlidingWindow window_append(SlidingWindow window, const Batch& batch) {
    window.append(batch);
    return window;
}

inline SlidingWindow window_discard_before(SlidingWindow window, ArrivalIndex cutoff) {
    window.discard_before(cutoff);
    return window;
}

// One edge of a tree path: feature[option] <= threshold when go_left, else
// feature[option] > threshold.
struct PathStep {
    int option = -1;
    double threshold = 0.0;
    bool go_left = true;

    bool matches(Features x) const {
        const bool left = x[static_cast<std::size_t>(option)] <= threshold;
        return left == go_left;
    }
};

// A subset of samples defined by a tree path of depth <= d. Divisions
// extracted from one tree partition the training set.
struct Division {
    int id = 0;
    std::vector<ConfigurationSample> samples;
    std::vector<PathStep> path;

    bool contains(Features x) const {
        for (const auto& step : path)
            if (!step.matches(x)) return false;
        return true;
    }
};

// Exactly one division of a partition matches any feature vector; paths are
// complementary tree edges.
inline int assign_division(std::span<const Division> divisions, Features x) {
    for (const auto& d : divisions)
        if (d.contains(x)) return d.id;
    throw std::logic_error("assign_division: no division matched; partition is inconsistent");
}

} // namespace dhda

#endif // DHDA_TYPES_HPP_
