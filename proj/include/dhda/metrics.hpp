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

#ifndef DHDA_METRICS_HPP_
#define DHDA_METRICS_HPP_

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhda {

// Mean absolute percentage error: (1/N) * sum |y_i - yhat_i| / y_i.
// Undefined for actuals <= 0.
inline double mape(std::span<const double> actuals, std::span<const double> predictions) {
    if (actuals.empty() || actuals.size() != predictions.size())
        throw std::invalid_argument("mape: need equal-length, nonempty inputs");
    double total = 0.0;
    for (std::size_t i = 0; i < actuals.size(); ++i) {
        if (!(actuals[i] > 0.0))
            throw std::invalid_argument("mape: actual value at position " + std::to_string(i) +
                                        " is not positive");
        total += std::abs(actuals[i] - predictions[i]) / actuals[i];
    }
    return total / static_cast<double>(actuals.size());
}

// Mean of the per-batch MAPE values; batches weigh equally regardless of
// their size.
inline double mmape(std::span<const double> per_batch_mape) {
    if (per_batch_mape.empty()) throw std::invalid_argument("mmape: empty input");
    double total = 0.0;
    for (double m : per_batch_mape) total += m;
    return total / static_cast<double>(per_batch_mape.size());
}

inline double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty input");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

// Linear-interpolation quantile (same convention as numpy's default).
inline double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile: empty input");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

inline double interquartile_range(const std::vector<double>& values) {
    return quantile(values, 0.75) - quantile(values, 0.25);
}

} // namespace dhda

#endif // DHDA_METRICS_HPP_
