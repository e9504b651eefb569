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
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "cloudfarm/erlang.hpp"

namespace cloudfarm {

/// An offered-load stream characterized by its first two moments. The
/// peakedness Z = variance/mean classifies burstiness: 1 for Poisson
/// traffic, greater than 1 for overflow traffic.
struct TrafficStream {
    double mean = 0.0;      // Erlangs
    double variance = 0.0;  // Erlangs^2

    double peakedness() const { return mean > 0.0 ? variance / mean : 1.0; }

    static TrafficStream poisson(double offered_load) {
        if (!(offered_load >= 0) || !std::isfinite(offered_load)) {
            throw std::domain_error("TrafficStream::poisson: offered load must be nonnegative");
        }
        return {offered_load, offered_load};
    }

    bool is_poisson(double tol = 1e-9) const {
        return std::fabs(variance - mean) <= tol * std::max(1.0, mean);
    }
};

/// Moments of the traffic overflowing an n-server group offered Poisson
/// load rho: mean rho*B(n,rho), variance by the Riordan formula. The
/// variance denominator n + 1 - rho + omega equals n + 1 minus the carried
/// load, so it is always >= 1.
inline TrafficStream overflow_stream(const TrafficStream& offered, std::int64_t servers) {
    if (!offered.is_poisson()) {
        throw std::domain_error("overflow_stream: Riordan's formula requires Poisson offered traffic");
    }
    if (servers < 0) {
        throw std::domain_error("overflow_stream: servers must be nonnegative");
    }
    const double rho = offered.mean;
    const double omega = rho * erlang_b_integer(servers, rho);
    if (omega == 0.0) return {};
    const double variance =
        omega * (1.0 - omega + rho / (static_cast<double>(servers) + 1.0 - rho + omega));
    return {omega, variance};
}

/// Superposition of independent streams: means and variances add.
inline TrafficStream superpose(std::span<const TrafficStream> streams) {
    TrafficStream total;
    for (const TrafficStream& s : streams) {
        total.mean += s.mean;
        total.variance += s.variance;
    }
    return total;
}

inline TrafficStream superpose(std::initializer_list<TrafficStream> streams) {
    return superpose(std::span<const TrafficStream>(streams.begin(), streams.size()));
}

/// Hayward's approximation: blocking of a peakedness-Z stream on n servers
/// is evaluated as B(n/Z, rho/Z). Exact when Z = 1.
inline double hayward_blocking(double servers, const TrafficStream& stream) {
    if (!(servers >= 0) || !std::isfinite(servers)) {
        throw std::domain_error("hayward_blocking: servers must be nonnegative");
    }
    const double z = stream.peakedness();
    if (!(z > 0.0)) {
        throw std::domain_error("hayward_blocking: peakedness must be positive");
    }
    return erlang_b(servers / z, stream.mean / z);
}

/// Attribute a total lost load to classes in proportion to their variance
/// share. The rounding residue is assigned to the largest component so the
/// parts always sum to the total exactly.
inline std::vector<double> split_losses(double total_lost,
                                        std::span<const double> class_variances,
                                        double total_variance) {
    if (!(total_lost >= 0)) {
        throw std::domain_error("split_losses: total lost load must be nonnegative");
    }
    double sum = 0.0;
    for (double v : class_variances) {
        if (!(v >= 0)) throw std::domain_error("split_losses: variances must be nonnegative");
        sum += v;
    }
    if (std::fabs(sum - total_variance) > 1e-9 * std::max(1.0, total_variance)) {
        throw std::invalid_argument("split_losses: class variances do not sum to the total");
    }
    std::vector<double> losses(class_variances.size(), 0.0);
    if (total_lost == 0.0 || class_variances.empty()) return losses;
    if (total_variance <= 0.0) {
        throw std::domain_error("split_losses: zero total variance with nonzero loss");
    }
    std::size_t largest = 0;
    for (std::size_t i = 0; i < class_variances.size(); ++i) {
        losses[i] = total_lost * class_variances[i] / total_variance;
        if (class_variances[i] > class_variances[largest]) largest = i;
    }
    // The largest class absorbs the rounding residue. For the two-class
    // case the pair is closed by complementing twice: the second
    // subtraction is exact (Sterbenz, largest part >= half the total), so
    // the parts re-sum to the total bit-for-bit.
    double others = 0.0;
    for (std::size_t i = 0; i < losses.size(); ++i) {
        if (i != largest) others += losses[i];
    }
    losses[largest] = total_lost - others;
    if (losses.size() == 2) {
        losses[1 - largest] = total_lost - losses[largest];
    }
    return losses;
}

inline std::vector<double> split_losses(double total_lost,
                                        std::initializer_list<double> class_variances,
                                        double total_variance) {
    return split_losses(total_lost,
                        std::span<const double>(class_variances.begin(), class_variances.size()),
                        total_variance);
}

}  // namespace cloudfarm
