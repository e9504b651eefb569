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
#include <stdexcept>
#include <string>

#include "cloudfarm/erlang.hpp"
#include "cloudfarm/traffic.hpp"

namespace cloudfarm {

/// Which analytic model prices an allocation: two independent pools, or a
/// premium pool whose blocked jobs overflow into the shared pool.
enum class ModelKind { isolated, overflow };

inline const char* to_string(ModelKind kind) {
    return kind == ModelKind::isolated ? "isolated" : "overflow";
}

inline ModelKind model_from_string(const std::string& name) {
    if (name == "isolated") return ModelKind::isolated;
    if (name == "overflow") return ModelKind::overflow;
    throw std::invalid_argument("unknown model: " + name);
}

/// Monetary and energy constants of the farm.
struct EconomicParams {
    double premium_charge = 0.03;     // $/server-hour billed to premium jobs
    double basic_charge = 0.085;      // $/server-hour billed to basic jobs
    double penalty = 0.2;             // $ per lost premium job
    double electricity_price = 0.1;   // $/kWh
    double idle_power = 59.0;         // W, powered-on idle server
    double busy_power = 83.5;         // W, server at 100% CPU
    double pue = 1.7;                 // facility power / IT power
    double cpu_util = 0.7;            // mean CPU demand of a running job
    double indirect_multiplier = 0.0; // overhead as a multiple of electricity cost

    void validate() const {
        if (!(busy_power >= idle_power) || !(idle_power > 0)) {
            throw std::invalid_argument("EconomicParams: need busy_power >= idle_power > 0");
        }
        if (!(pue >= 1.0)) throw std::invalid_argument("EconomicParams: PUE must be >= 1");
        if (!(cpu_util > 0.0) || !(cpu_util <= 1.0)) {
            throw std::invalid_argument("EconomicParams: cpu_util must be in (0, 1]");
        }
        if (premium_charge < 0 || basic_charge < 0 || penalty < 0 ||
            electricity_price < 0 || indirect_multiplier < 0) {
            throw std::invalid_argument("EconomicParams: monetary fields must be nonnegative");
        }
    }

    /// Effective power of a busy server at the configured CPU demand.
    double effective_busy_power() const {
        return idle_power + cpu_util * (busy_power - idle_power);
    }

    /// $/hour for drawing `watts` of IT power, including PUE and indirect overhead.
    double power_cost_per_hour(double watts) const {
        return electricity_price * (watts / 1000.0) * pue * (1.0 + indirect_multiplier);
    }
};

/// Decision vector (n1, n2); servers not allocated to either pool are off.
struct Allocation {
    int premium_servers = 0;  // n1
    int shared_servers = 0;   // n2
    int total_servers = 0;    // S

    int off_servers() const { return total_servers - premium_servers - shared_servers; }

    bool feasible() const {
        return premium_servers >= 0 && shared_servers >= 0 &&
               premium_servers + shared_servers <= total_servers;
    }

    void validate() const {
        if (!feasible()) throw std::invalid_argument("Allocation: infeasible (n1, n2) for total");
    }

    friend bool operator==(const Allocation&, const Allocation&) = default;
};

/// Everything the revenue function produces for one evaluated allocation.
struct RevenueBreakdown {
    double revenue = 0.0;            // R, $/hour
    double premium_revenue = 0.0;    // R1
    double basic_revenue = 0.0;      // R2
    double premium_throughput = 0.0; // T1, jobs/hour
    double basic_throughput = 0.0;   // T2
    double premium_power = 0.0;      // P1, W
    double basic_power = 0.0;        // P2, W
    double penalty_rate = 0.0;       // D, $/hour
    double premium_lost = 0.0;       // L1, Erlangs
    double basic_lost = 0.0;         // L2, Erlangs
};

/// Average power draw of a pool: idle floor for every powered-on server
/// plus the CPU-load-dependent increment for the busy-server equivalent.
/// The busy equivalent may exceed the pool size under overflow accounting.
inline double power_draw(int powered_on, double busy_equivalent, const EconomicParams& params) {
    if (powered_on < 0 || !(busy_equivalent >= 0)) {
        throw std::domain_error("power_draw: inputs must be nonnegative");
    }
    return powered_on * params.idle_power +
           busy_equivalent * (params.effective_busy_power() - params.idle_power);
}

namespace detail {

inline double busy_equivalent(double value, bool ceiling_power) {
    return ceiling_power ? std::ceil(value) : value;
}

}  // namespace detail

/// Caching revenue evaluator for one operating point (loads, service rate,
/// economics, model). Optimizers probe many allocations; the integer
/// Erlang-B values are memoized per pool so each probe is O(1) apart from
/// the fractional Hayward evaluation. Not safe for concurrent use of a
/// shared instance; use one instance per thread.
class RevenueModel {
public:
    RevenueModel(double rho1, double rho2, double service_rate, EconomicParams params,
                 ModelKind kind, bool ceiling_power = false)
        : rho1_(rho1),
          rho2_(rho2),
          mu_(service_rate),
          params_(params),
          kind_(kind),
          ceiling_power_(ceiling_power),
          table1_(rho1),
          table2_(rho2) {
        if (!(rho1 >= 0) || !(rho2 >= 0)) {
            throw std::domain_error("RevenueModel: offered loads must be nonnegative");
        }
        if (!(service_rate > 0)) {
            throw std::domain_error("RevenueModel: service rate must be positive");
        }
        params_.validate();
    }

    ModelKind kind() const { return kind_; }
    double premium_load() const { return rho1_; }
    double basic_load() const { return rho2_; }
    double service_rate() const { return mu_; }
    const EconomicParams& params() const { return params_; }

    RevenueBreakdown evaluate(const Allocation& alloc) {
        alloc.validate();
        return evaluate(alloc.premium_servers, alloc.shared_servers);
    }

    RevenueBreakdown evaluate(int n1, int n2) {
        if (n1 < 0 || n2 < 0) throw std::domain_error("RevenueModel: negative pool size");
        return kind_ == ModelKind::isolated ? evaluate_isolated(n1, n2)
                                            : evaluate_overflow(n1, n2);
    }

private:
    RevenueBreakdown evaluate_isolated(int n1, int n2) {
        RevenueBreakdown out;
        const double b1 = table1_(n1);
        const double b2 = table2_(n2);
        const double lambda1 = rho1_ * mu_;
        const double lambda2 = rho2_ * mu_;

        out.premium_throughput = lambda1 * (1.0 - b1);
        out.basic_throughput = lambda2 * (1.0 - b2);
        out.premium_lost = rho1_ * b1;
        out.basic_lost = rho2_ * b2;
        out.penalty_rate = params_.penalty * lambda1 * b1;
        out.premium_power = power_draw(
            n1, detail::busy_equivalent(out.premium_throughput / mu_, ceiling_power_), params_);
        out.basic_power = power_draw(
            n2, detail::busy_equivalent(out.basic_throughput / mu_, ceiling_power_), params_);
        out.premium_revenue = (params_.premium_charge / mu_) * out.premium_throughput -
                              params_.power_cost_per_hour(out.premium_power) - out.penalty_rate;
        out.basic_revenue = (params_.basic_charge / mu_) * out.basic_throughput -
                            params_.power_cost_per_hour(out.basic_power);
        out.revenue = out.premium_revenue + out.basic_revenue;
        return out;
    }

    RevenueBreakdown evaluate_overflow(int n1, int n2) {
        RevenueBreakdown out;
        const double lambda1 = rho1_ * mu_;
        const double lambda2 = rho2_ * mu_;

        // Premium traffic blocked at pool 1 becomes the overflow stream;
        // with n1 = 0 it passes through unchanged as Poisson.
        TrafficStream spill;
        const double omega1 = rho1_ * table1_(n1);
        if (omega1 > 0.0) {
            spill.mean = omega1;
            spill.variance =
                omega1 * (1.0 - omega1 + rho1_ / (static_cast<double>(n1) + 1.0 - rho1_ + omega1));
        }
        const TrafficStream basic = TrafficStream::poisson(rho2_);
        const TrafficStream combined = superpose({spill, basic});

        double lost1 = 0.0;
        double lost2 = 0.0;
        if (combined.mean > 0.0) {
            const double total_lost = combined.mean * hayward_blocking(n2, combined);
            const auto parts = split_losses(total_lost, {spill.variance, basic.variance},
                                            combined.variance);
            // Each class can lose at most what it offers; the split touches
            // these bounds at full blocking and roundoff may step over.
            lost1 = std::clamp(parts[0], 0.0, rho1_);
            lost2 = std::clamp(parts[1], 0.0, rho2_);
        }

        out.premium_lost = lost1;
        out.basic_lost = lost2;
        out.premium_throughput = std::max(0.0, lambda1 - lost1 * mu_);
        out.basic_throughput = std::max(0.0, lambda2 - lost2 * mu_);
        out.penalty_rate = params_.penalty * lost1 * mu_;

        // Premium occupancy beyond pool 1 runs on shared-pool hardware, so
        // its busy-power increment is charged there.
        const double premium_busy_raw = out.premium_throughput / mu_;
        const double premium_busy = std::min(premium_busy_raw, static_cast<double>(n1));
        const double spill_busy = std::max(premium_busy_raw - static_cast<double>(n1), 0.0);
        out.premium_power =
            power_draw(n1, detail::busy_equivalent(premium_busy, ceiling_power_), params_);
        out.basic_power = power_draw(
            n2, detail::busy_equivalent(out.basic_throughput / mu_ + spill_busy, ceiling_power_),
            params_);
        out.premium_revenue = (params_.premium_charge / mu_) * out.premium_throughput -
                              params_.power_cost_per_hour(out.premium_power) - out.penalty_rate;
        out.basic_revenue = (params_.basic_charge / mu_) * out.basic_throughput -
                            params_.power_cost_per_hour(out.basic_power);
        out.revenue = out.premium_revenue + out.basic_revenue;
        return out;
    }

    double rho1_;
    double rho2_;
    double mu_;
    EconomicParams params_;
    ModelKind kind_;
    bool ceiling_power_;
    ErlangBTable table1_;
    ErlangBTable table2_;
};

/// Expected revenue per unit time when the two pools are independent loss
/// systems.
inline RevenueBreakdown revenue_isolated(const Allocation& alloc, double rho1, double rho2,
                                         double service_rate, const EconomicParams& params,
                                         bool ceiling_power = false) {
    RevenueModel model(rho1, rho2, service_rate, params, ModelKind::isolated, ceiling_power);
    return model.evaluate(alloc);
}

/// Expected revenue per unit time when premium jobs blocked at pool 1
/// overflow into the shared pool (moment-matched Hayward approximation).
inline RevenueBreakdown revenue_overflow(const Allocation& alloc, double rho1, double rho2,
                                         double service_rate, const EconomicParams& params,
                                         bool ceiling_power = false) {
    RevenueModel model(rho1, rho2, service_rate, params, ModelKind::overflow, ceiling_power);
    return model.evaluate(alloc);
}

}  // namespace cloudfarm
