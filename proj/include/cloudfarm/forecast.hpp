// Copyright 2026 The cloudfarm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <stdexcept>
#include <vector>

namespace cloudfarm {

/// Double exponential (Holt) smoothing of a rate series. The first
/// observation seeds the level, the second seeds the trend; afterwards the
/// standard level/trend recursions apply. Forecasts are clamped at zero.
class HoltSmoother {
public:
    explicit HoltSmoother(double alpha = 0.5, double beta = 0.5) : alpha_(alpha), beta_(beta) {
        if (!(alpha > 0.0) || !(alpha <= 1.0) || !(beta > 0.0) || !(beta <= 1.0)) {
            throw std::invalid_argument("HoltSmoother: smoothing constants must be in (0, 1]");
        }
    }

    /// Feed one observation; returns the forecast for the next epoch.
    double update(double observed) {
        if (!(observed >= 0)) {
            throw std::invalid_argument("HoltSmoother: observations must be nonnegative");
        }
        if (observations_ == 0) {
            level_ = observed;
            trend_ = 0.0;
        } else if (observations_ == 1) {
            trend_ = observed - level_;
            level_ = observed;
        } else {
            const double prev_level = level_;
            level_ = alpha_ * observed + (1.0 - alpha_) * (level_ + trend_);
            trend_ = beta_ * (level_ - prev_level) + (1.0 - beta_) * trend_;
        }
        ++observations_;
        return forecast();
    }

    double forecast() const { return std::max(0.0, level_ + trend_); }
    bool initialized() const { return observations_ >= 2; }
    double level() const { return level_; }
    double trend() const { return trend_; }
    long observations() const { return observations_; }

private:
    double alpha_;
    double beta_;
    double level_ = 0.0;
    double trend_ = 0.0;
    long observations_ = 0;
};

/// Sliding window of relative forecast errors (actual - forecast)/forecast.
/// Positive entries are under-forecasts, the direction the Percentile
/// heuristic guards against. Serves the nearest-rank percentile, with a
/// configured fallback while too little history has accumulated.
class ErrorHistory {
public:
    explicit ErrorHistory(std::size_t capacity = 360, double default_margin = 0.11,
                          std::size_t min_samples = 50)
        : capacity_(capacity), default_margin_(default_margin), min_samples_(min_samples) {
        if (capacity_ == 0) throw std::invalid_argument("ErrorHistory: capacity must be positive");
    }

    /// Record one epoch's outcome. Epochs with nonpositive actual rate are
    /// skipped (nothing to compare); nonpositive forecasts cannot be
    /// normalized and are skipped with a counted event.
    void record(double forecast, double actual) {
        if (!(actual > 0.0) || !(forecast > 0.0)) {
            ++skipped_;
            return;
        }
        errors_.push_back((actual - forecast) / forecast);
        while (errors_.size() > capacity_) errors_.pop_front();
    }

    /// Nearest-rank x-th percentile of the stored errors; the configured
    /// default when the window is empty.
    double percentile(double x) const {
        if (!(x > 0.0) || !(x < 1.0)) {
            throw std::invalid_argument("ErrorHistory: percentile must be in (0, 1)");
        }
        if (errors_.empty()) return default_margin_;
        std::vector<double> sorted(errors_.begin(), errors_.end());
        std::sort(sorted.begin(), sorted.end());
        const std::size_t rank =
            static_cast<std::size_t>(std::ceil(x * static_cast<double>(sorted.size())));
        return sorted[std::max<std::size_t>(rank, 1) - 1];
    }

    /// Margin used for allocation decisions: the percentile once enough
    /// errors are on record, the cold-start default before that.
    double margin(double x) const {
        return errors_.size() < min_samples_ ? default_margin_ : percentile(x);
    }

    std::size_t size() const { return errors_.size(); }
    std::size_t skipped() const { return skipped_; }
    double default_margin() const { return default_margin_; }
    const std::deque<double>& errors() const { return errors_; }

private:
    std::deque<double> errors_;
    std::size_t capacity_;
    double default_margin_;
    std::size_t min_samples_;
    std::size_t skipped_ = 0;
};

}  // namespace cloudfarm
