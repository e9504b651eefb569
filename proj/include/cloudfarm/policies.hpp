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

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "cloudfarm/economics.hpp"

namespace cloudfarm {

/// Knobs shared by the allocation policies.
struct PolicyConfig {
    ModelKind model = ModelKind::overflow;
    double blocking_target = 1e-5;  // tau, premium blocking bound for capping
    double percentile = 0.95;       // x, forecast-error percentile
    bool ceiling_power = false;     // round busy-server equivalents up in Eq.-style power

    void validate() const {
        if (!(blocking_target > 0.0) || !(blocking_target < 1.0)) {
            throw std::invalid_argument("PolicyConfig: blocking_target must be in (0, 1)");
        }
        if (!(percentile > 0.0) || !(percentile < 1.0)) {
            throw std::invalid_argument("PolicyConfig: percentile must be in (0, 1)");
        }
    }
};

struct OptimizationResult {
    Allocation allocation;
    RevenueBreakdown breakdown;
};

/// Number of ways to allocate S servers across the premium, shared and off
/// pools: C(S+2, 2).
inline std::int64_t count_allocations(int total_servers) {
    if (total_servers < 0) throw std::domain_error("count_allocations: negative server count");
    const std::int64_t s = total_servers;
    return (s + 2) * (s + 1) / 2;
}

namespace detail {

// Prefer higher revenue; break exact ties toward fewer running servers,
// then toward a smaller premium pool.
inline bool better_allocation(double revenue, const Allocation& alloc, double best_revenue,
                              const Allocation& best) {
    if (revenue != best_revenue) return revenue > best_revenue;
    const int on = alloc.premium_servers + alloc.shared_servers;
    const int best_on = best.premium_servers + best.shared_servers;
    if (on != best_on) return on < best_on;
    return alloc.premium_servers < best.premium_servers;
}

}  // namespace detail

/// Full O(S^2) scan of every allocation. Exact, used as the optimality
/// oracle and for small instances; refuses large S where the scan would be
/// abused online.
inline OptimizationResult optimize_exhaustive(int total_servers, double rho1, double rho2,
                                              double service_rate, const EconomicParams& params,
                                              const PolicyConfig& config = {}) {
    if (total_servers < 0) throw std::invalid_argument("optimize_exhaustive: negative S");
    if (total_servers > 500) {
        throw std::invalid_argument("optimize_exhaustive: guarded at S <= 500; use hill climbing");
    }
    RevenueModel model(rho1, rho2, service_rate, params, config.model, config.ceiling_power);
    Allocation best{0, 0, total_servers};
    RevenueBreakdown best_breakdown = model.evaluate(best);
    for (int n1 = 0; n1 <= total_servers; ++n1) {
        for (int n2 = 0; n2 <= total_servers - n1; ++n2) {
            const RevenueBreakdown candidate = model.evaluate(n1, n2);
            const Allocation alloc{n1, n2, total_servers};
            if (detail::better_allocation(candidate.revenue, alloc, best_breakdown.revenue, best)) {
                best = alloc;
                best_breakdown = candidate;
            }
        }
    }
    return {best, best_breakdown};
}

namespace detail {

// The six single-server switches between the premium, shared and off pools,
// in the fixed tie-break order 1->2, 2->1, off->1, off->2, 1->off, 2->off.
inline constexpr std::array<std::pair<int, int>, 6> kMoves = {{
    {-1, +1}, {+1, -1}, {+1, 0}, {0, +1}, {-1, 0}, {0, -1},
}};

inline OptimizationResult hill_climb_from(RevenueModel& model, int total_servers, int n1, int n2) {
    double revenue = model.evaluate(n1, n2).revenue;
    const std::int64_t max_steps = count_allocations(total_servers);
    for (std::int64_t step = 0; step < max_steps; ++step) {
        int best_n1 = n1;
        int best_n2 = n2;
        double best_revenue = revenue;
        for (const auto& [d1, d2] : kMoves) {
            const int m1 = n1 + d1;
            const int m2 = n2 + d2;
            if (m1 < 0 || m2 < 0 || m1 + m2 > total_servers) continue;
            const double candidate = model.evaluate(m1, m2).revenue;
            if (candidate > best_revenue) {
                best_revenue = candidate;
                best_n1 = m1;
                best_n2 = m2;
            }
        }
        if (best_revenue <= revenue) break;  // local optimum: no strictly improving switch
        n1 = best_n1;
        n2 = best_n2;
        revenue = best_revenue;
    }
    return {Allocation{n1, n2, total_servers}, model.evaluate(n1, n2)};
}

}  // namespace detail

/// Scale a requested pair down proportionally when it exceeds the farm.
inline Allocation clamp_proportional(int total_servers, int n1, int n2) {
    if (total_servers < 0 || n1 < 0 || n2 < 0) {
        throw std::domain_error("clamp_proportional: negative input");
    }
    if (n1 + n2 > total_servers) {
        const double scale = static_cast<double>(total_servers) / (n1 + n2);
        n1 = static_cast<int>(std::floor(n1 * scale));
        n2 = static_cast<int>(std::floor(n2 * scale));
    }
    return Allocation{n1, n2, total_servers};
}

/// Steepest-ascent hill climbing over single-server switches, restarted
/// from the empty farm, the all-premium farm, and the load-proportional
/// allocation; returns the best of the three runs. Deterministic.
inline OptimizationResult optimize_hill_climb(int total_servers, double rho1, double rho2,
                                              double service_rate, const EconomicParams& params,
                                              const PolicyConfig& config = {}) {
    if (total_servers < 0) throw std::invalid_argument("optimize_hill_climb: negative S");
    RevenueModel model(rho1, rho2, service_rate, params, config.model, config.ceiling_power);

    const Allocation proportional = clamp_proportional(
        total_servers, static_cast<int>(std::ceil(rho1)), static_cast<int>(std::ceil(rho2)));
    const std::array<std::pair<int, int>, 3> starts = {{
        {0, 0},
        {total_servers, 0},
        {proportional.premium_servers, proportional.shared_servers},
    }};

    OptimizationResult best;
    bool have_best = false;
    for (const auto& [s1, s2] : starts) {
        OptimizationResult run = detail::hill_climb_from(model, total_servers, s1, s2);
        if (!have_best || run.breakdown.revenue > best.breakdown.revenue) {
            best = std::move(run);
            have_best = true;
        }
    }
    return best;
}

/// Penalty Capping heuristic: size the premium pool so its blocking stays
/// below tau, then size the shared pool by maximizing the basic-class
/// revenue against the leftover load rho2 + omega1 in isolation. The
/// marginal revenue of a shared server is decreasing, so the argmax is
/// found by bisection on the forward difference.
inline Allocation penalty_capping(int total_servers, double rho1, double rho2,
                                  double service_rate, const EconomicParams& params, double tau) {
    if (total_servers < 0) throw std::invalid_argument("penalty_capping: negative S");
    if (!(tau > 0.0) || !(tau < 1.0)) {
        throw std::invalid_argument("penalty_capping: tau must be in (0, 1)");
    }
    if (!(service_rate > 0)) throw std::invalid_argument("penalty_capping: service rate must be positive");
    params.validate();

    const std::int64_t wanted = min_servers_for_blocking(rho1, tau);
    const int n1 = static_cast<int>(std::min<std::int64_t>(wanted, total_servers));
    const int budget = total_servers - n1;
    if (budget == 0) return Allocation{n1, 0, total_servers};

    const double spill = rho1 * erlang_b_integer(n1, rho1);
    const double load = rho2 + spill;
    ErlangBTable table(load);
    const auto basic_revenue = [&](int n) {
        const double carried = load * (1.0 - table(n));
        const double power = power_draw(n, carried, params);
        return params.basic_charge * carried - params.power_cost_per_hour(power);
    };

    // Smallest n with nonpositive marginal gain; the marginal is decreasing
    // wherever the carried margin is positive and negative everywhere else.
    int low = 0;
    int high = budget;
    while (low < high) {
        const int mid = low + (high - low) / 2;
        if (basic_revenue(mid + 1) - basic_revenue(mid) <= 0.0) {
            high = mid;
        } else {
            low = mid + 1;
        }
    }
    return Allocation{n1, low, total_servers};
}

namespace detail {

// Ceiling with a relative slack so values that are integers up to roundoff
// (e.g. 100 * 1.11) do not get bumped to the next integer.
inline std::int64_t ceil_with_slack(double value) {
    return static_cast<std::int64_t>(std::ceil(value - 1e-9 * (1.0 + std::fabs(value))));
}

}  // namespace detail

/// Percentile heuristic for one queue: allocate for the forecast load
/// inflated by the error margin, n = ceil(rho * (1 + margin)).
inline int percentile_allocation(double forecast_load, double error_margin) {
    if (!(forecast_load >= 0)) {
        throw std::domain_error("percentile_allocation: forecast load must be nonnegative");
    }
    if (!(error_margin >= -1.0)) {
        throw std::domain_error("percentile_allocation: margin below -1 would negate the load");
    }
    return static_cast<int>(detail::ceil_with_slack(forecast_load * (1.0 + error_margin)));
}

/// Percentile-Optimal: run the full optimizer on forecasts inflated by the
/// error margin.
inline OptimizationResult percentile_optimal(int total_servers, double forecast1,
                                             double forecast2, double error_margin,
                                             double service_rate, const EconomicParams& params,
                                             const PolicyConfig& config = {}) {
    if (!(forecast1 >= 0) || !(forecast2 >= 0)) {
        throw std::domain_error("percentile_optimal: forecasts must be nonnegative");
    }
    if (!(error_margin >= -1.0)) {
        throw std::domain_error("percentile_optimal: margin below -1 would negate the load");
    }
    return optimize_hill_climb(total_servers, forecast1 * (1.0 + error_margin),
                               forecast2 * (1.0 + error_margin), service_rate, params, config);
}

/// One common always-running pool: every server on, premium traffic served
/// entirely through overflow.
inline Allocation always_on(int total_servers) {
    if (total_servers < 0) throw std::invalid_argument("always_on: negative S");
    return Allocation{0, total_servers, total_servers};
}

}  // namespace cloudfarm
