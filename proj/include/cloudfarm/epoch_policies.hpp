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

#include <memory>
#include <stdexcept>
#include <string>

#include "cloudfarm/economics.hpp"
#include "cloudfarm/forecast.hpp"
#include "cloudfarm/policies.hpp"
#include "cloudfarm/simulator.hpp"

namespace cloudfarm {

/// Constant allocation regardless of traffic; used for validation runs.
class FixedPolicy : public EpochPolicy {
public:
    explicit FixedPolicy(Allocation alloc) : alloc_(alloc) { alloc_.validate(); }
    Allocation decide(const DemandEstimate&) override { return alloc_; }
    std::string name() const override { return "fixed"; }

private:
    Allocation alloc_;
};

/// All servers in one common pool, always on.
class AlwaysOnPolicy : public EpochPolicy {
public:
    explicit AlwaysOnPolicy(int total_servers) : alloc_(always_on(total_servers)) {}
    Allocation decide(const DemandEstimate&) override { return alloc_; }
    std::string name() const override { return "always-on"; }

private:
    Allocation alloc_;
};

/// Re-optimizes every epoch by hill climbing on the measured loads.
class OptimalPolicy : public EpochPolicy {
public:
    OptimalPolicy(int total_servers, EconomicParams econ, PolicyConfig config,
                  std::string label = "optimal")
        : total_servers_(total_servers), econ_(econ), config_(config), label_(std::move(label)) {
        config_.validate();
    }

    Allocation decide(const DemandEstimate& estimate) override {
        const double rho1 = estimate.premium_rate / estimate.service_rate;
        const double rho2 = estimate.basic_rate / estimate.service_rate;
        return optimize_hill_climb(total_servers_, rho1, rho2, estimate.service_rate, econ_,
                                   config_)
            .allocation;
    }

    std::string name() const override { return label_; }

private:
    int total_servers_;
    EconomicParams econ_;
    PolicyConfig config_;
    std::string label_;
};

/// Caps premium blocking below tau, then sizes the shared pool in isolation.
class PenaltyCappingPolicy : public EpochPolicy {
public:
    PenaltyCappingPolicy(int total_servers, EconomicParams econ, PolicyConfig config)
        : total_servers_(total_servers), econ_(econ), config_(config) {
        config_.validate();
    }

    Allocation decide(const DemandEstimate& estimate) override {
        const double rho1 = estimate.premium_rate / estimate.service_rate;
        const double rho2 = estimate.basic_rate / estimate.service_rate;
        return penalty_capping(total_servers_, rho1, rho2, estimate.service_rate, econ_,
                               config_.blocking_target);
    }

    std::string name() const override { return "penalty-capping"; }

private:
    int total_servers_;
    EconomicParams econ_;
    PolicyConfig config_;
};

namespace detail {

// Shared forecasting state of the two percentile-style policies: one Holt
// smoother and one relative-error window per class.
struct ForecastState {
    HoltSmoother smoother1;
    HoltSmoother smoother2;
    ErrorHistory errors1;
    ErrorHistory errors2;
    double forecast1 = -1.0;
    double forecast2 = -1.0;

    // Returns per-class forecasts after folding in this epoch's measurement.
    void observe(const DemandEstimate& estimate) {
        if (forecast1 >= 0.0) {
            errors1.record(forecast1, estimate.premium_rate);
            errors2.record(forecast2, estimate.basic_rate);
        }
        forecast1 = smoother1.update(estimate.premium_rate);
        forecast2 = smoother2.update(estimate.basic_rate);
    }
};

}  // namespace detail

/// Forecasts each queue with Holt smoothing and over-provisions by the
/// observed x-th percentile of the relative forecast error.
class PercentilePolicy : public EpochPolicy {
public:
    PercentilePolicy(int total_servers, PolicyConfig config)
        : total_servers_(total_servers), config_(config) {
        config_.validate();
    }

    Allocation decide(const DemandEstimate& estimate) override {
        state_.observe(estimate);
        const double margin1 = state_.errors1.margin(config_.percentile);
        const double margin2 = state_.errors2.margin(config_.percentile);
        const int n1 =
            percentile_allocation(state_.forecast1 / estimate.service_rate, margin1);
        const int n2 =
            percentile_allocation(state_.forecast2 / estimate.service_rate, margin2);
        return clamp_proportional(total_servers_, n1, n2);
    }

    std::string name() const override { return "percentile"; }

private:
    int total_servers_;
    PolicyConfig config_;
    detail::ForecastState state_;
};

/// Runs the optimizer on percentile-inflated forecasts instead of raw
/// measurements.
class PercentileOptimalPolicy : public EpochPolicy {
public:
    PercentileOptimalPolicy(int total_servers, EconomicParams econ, PolicyConfig config)
        : total_servers_(total_servers), econ_(econ), config_(config) {
        config_.validate();
    }

    Allocation decide(const DemandEstimate& estimate) override {
        state_.observe(estimate);
        const double margin1 = state_.errors1.margin(config_.percentile);
        const double margin2 = state_.errors2.margin(config_.percentile);
        const double rho1 = state_.forecast1 / estimate.service_rate * (1.0 + margin1);
        const double rho2 = state_.forecast2 / estimate.service_rate * (1.0 + margin2);
        return optimize_hill_climb(total_servers_, rho1, rho2, estimate.service_rate, econ_,
                                   config_)
            .allocation;
    }

    std::string name() const override { return "percentile-optimal"; }

private:
    int total_servers_;
    EconomicParams econ_;
    PolicyConfig config_;
    detail::ForecastState state_;
};

/// Routing mode a named policy is meant to be simulated under: the
/// isolated-model policy keeps premium jobs out of the shared pool.
inline ModelKind routing_for_policy(const std::string& name) {
    return name == "isolated" ? ModelKind::isolated : ModelKind::overflow;
}

/// Build a named policy. Names: optimal, isolated, penalty-capping,
/// percentile, percentile-optimal, always-on, fixed (requires
/// fixed_premium/fixed_shared).
inline std::unique_ptr<EpochPolicy> make_policy(const std::string& name, int total_servers,
                                                const EconomicParams& econ, PolicyConfig config,
                                                int fixed_premium = 0, int fixed_shared = 0) {
    if (name == "optimal") {
        config.model = ModelKind::overflow;
        return std::make_unique<OptimalPolicy>(total_servers, econ, config);
    }
    if (name == "isolated") {
        config.model = ModelKind::isolated;
        return std::make_unique<OptimalPolicy>(total_servers, econ, config, "isolated");
    }
    if (name == "penalty-capping") {
        return std::make_unique<PenaltyCappingPolicy>(total_servers, econ, config);
    }
    if (name == "percentile") {
        return std::make_unique<PercentilePolicy>(total_servers, config);
    }
    if (name == "percentile-optimal") {
        config.model = ModelKind::overflow;
        return std::make_unique<PercentileOptimalPolicy>(total_servers, econ, config);
    }
    if (name == "always-on") {
        return std::make_unique<AlwaysOnPolicy>(total_servers);
    }
    if (name == "fixed") {
        return std::make_unique<FixedPolicy>(
            Allocation{fixed_premium, fixed_shared, total_servers});
    }
    throw std::invalid_argument("unknown policy: " + name);
}

}  // namespace cloudfarm
