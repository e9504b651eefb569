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

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

namespace cloudfarm {

/// Blocking probability of an M/GI/n/n loss system with integer server
/// count, computed by the stable recursion
///   B(0) = 1,  B(k) = rho B(k-1) / (k + rho B(k-1)).
inline double erlang_b_integer(std::int64_t servers, double offered_load) {
    if (servers < 0 || !(offered_load >= 0) || !std::isfinite(offered_load)) {
        throw std::domain_error("erlang_b_integer: servers and offered load must be nonnegative");
    }
    double b = 1.0;
    for (std::int64_t k = 1; k <= servers; ++k) {
        b = offered_load * b / (static_cast<double>(k) + offered_load * b);
    }
    return b;
}

namespace detail {

inline constexpr double kGammaEps = 1e-15;
inline constexpr int kGammaMaxIter = 100000;

// Lentz continued fraction for the upper incomplete gamma function,
// Gamma(a, x) = e^{-x} x^a * H(a, x). Returns H. Converges for x > a + 1.
inline double upper_gamma_cf(double a, double x) {
    const double fpmin = std::numeric_limits<double>::min() / kGammaEps;
    double b = x + 1.0 - a;
    double c = 1.0 / fpmin;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kGammaMaxIter; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kGammaEps) return h;
    }
    throw std::runtime_error("upper_gamma_cf: continued fraction did not converge");
}

// Regularized lower incomplete gamma P(a, x) by power series; for x < a + 1.
inline double regularized_lower_gamma_series(double a, double x) {
    if (x == 0.0) return 0.0;
    double ap = a;
    double term = 1.0 / a;
    double sum = term;
    for (int i = 0; i < kGammaMaxIter; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kGammaEps) {
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        }
    }
    throw std::runtime_error("regularized_lower_gamma_series: did not converge");
}

}  // namespace detail

/// Erlang-B for a nonintegral number of servers,
///   B(n, rho) = rho^n e^{-rho} / Gamma(n+1, rho),
/// evaluated through the reciprocal in log space so that neither the power
/// nor the incomplete gamma under/overflows. Also defined at integer n,
/// where it agrees with the recursion (within roundoff).
inline double erlang_b_fractional(double servers, double offered_load) {
    if (!(servers >= 0) || !(offered_load >= 0) ||
        !std::isfinite(servers) || !std::isfinite(offered_load)) {
        throw std::domain_error("erlang_b_fractional: servers and offered load must be nonnegative");
    }
    if (servers == 0.0) return 1.0;
    if (offered_load == 0.0) return 0.0;

    const double a = servers + 1.0;
    const double x = offered_load;
    if (x >= a + 1.0) {
        // 1/B = Gamma(a, x) x^{-(a-1)} e^x = x * H(a, x); the exponential
        // factors cancel exactly because the gamma argument equals the load.
        return 1.0 / (x * detail::upper_gamma_cf(a, x));
    }
    const double p = detail::regularized_lower_gamma_series(a, x);
    const double q = 1.0 - p;
    const double log_inv_b = std::log(q) + std::lgamma(a) - servers * std::log(x) + x;
    return std::exp(-log_inv_b);
}

/// Erlang-B for real server counts: dispatches integral n to the exact
/// recursion and everything else to the incomplete-gamma evaluation.
inline double erlang_b(double servers, double offered_load) {
    if (!(servers >= 0) || !std::isfinite(servers)) {
        throw std::domain_error("erlang_b: servers must be nonnegative");
    }
    if (servers == std::floor(servers) && servers <= 1e6) {
        return erlang_b_integer(static_cast<std::int64_t>(servers), offered_load);
    }
    return erlang_b_fractional(servers, offered_load);
}

/// Result of solving the birth-and-death balance equations of a loss system.
struct LossEvaluation {
    double servers = 0.0;
    double blocking = 1.0;
    std::vector<double> distribution;  // p_0 .. p_n
};

/// Stationary distribution of the M/GI/n/n occupancy,
/// p_k = (rho^k / k!) p_0, normalized. Independent route to the blocking
/// probability: the last entry equals erlang_b_integer(n, rho).
inline LossEvaluation stationary_distribution(std::int64_t servers, double offered_load) {
    if (servers < 0 || !(offered_load >= 0) || !std::isfinite(offered_load)) {
        throw std::domain_error("stationary_distribution: servers and offered load must be nonnegative");
    }
    std::vector<double> weights(static_cast<std::size_t>(servers) + 1);
    weights[0] = 1.0;
    double sum = 1.0;
    double current = 1.0;
    for (std::int64_t k = 1; k <= servers; ++k) {
        current *= offered_load / static_cast<double>(k);
        if (current > 1e250) {
            // Rescale to keep the unnormalized weights representable.
            for (std::int64_t j = 0; j < k; ++j) weights[static_cast<std::size_t>(j)] /= current;
            sum /= current;
            current = 1.0;
        }
        weights[static_cast<std::size_t>(k)] = current;
        sum += current;
    }
    for (double& w : weights) w /= sum;
    LossEvaluation result;
    result.servers = static_cast<double>(servers);
    result.blocking = weights.back();
    result.distribution = std::move(weights);
    return result;
}

/// Smallest integer n with B(n, rho) < tau. Exponential bracketing followed
/// by bisection on the strictly decreasing blocking curve.
inline std::int64_t min_servers_for_blocking(double offered_load, double tau) {
    if (!(tau > 0.0)) {
        throw std::domain_error("min_servers_for_blocking: blocking target must be positive");
    }
    if (!(offered_load >= 0) || !std::isfinite(offered_load)) {
        throw std::domain_error("min_servers_for_blocking: offered load must be nonnegative");
    }
    if (offered_load == 0.0) return 0;
    if (1.0 < tau) return 0;  // zero servers already meet a target above 1

    std::int64_t low = 0;   // B(low) >= tau
    std::int64_t high = 1;  // grows until B(high) < tau
    while (erlang_b_integer(high, offered_load) >= tau) {
        low = high;
        high *= 2;
        if (high > (std::int64_t{1} << 40)) {
            throw std::runtime_error("min_servers_for_blocking: bracket exceeded 2^40 servers");
        }
    }
    while (high - low > 1) {
        const std::int64_t mid = low + (high - low) / 2;
        if (erlang_b_integer(mid, offered_load) < tau) {
            high = mid;
        } else {
            low = mid;
        }
    }
    return high;
}

/// Incrementally grown table of B(k, rho) for k = 0..n at fixed rho.
/// Turns repeated blocking lookups during optimization into O(1) reads.
class ErlangBTable {
public:
    explicit ErlangBTable(double offered_load) : rho_(offered_load), values_{1.0} {
        if (!(offered_load >= 0) || !std::isfinite(offered_load)) {
            throw std::domain_error("ErlangBTable: offered load must be nonnegative");
        }
    }

    double operator()(std::int64_t servers) {
        if (servers < 0) throw std::domain_error("ErlangBTable: servers must be nonnegative");
        const auto n = static_cast<std::size_t>(servers);
        while (values_.size() <= n) {
            const double prev = values_.back();
            const double k = static_cast<double>(values_.size());
            values_.push_back(rho_ * prev / (k + rho_ * prev));
        }
        return values_[n];
    }

    double offered_load() const { return rho_; }

private:
    double rho_;
    std::vector<double> values_;
};

}  // namespace cloudfarm
