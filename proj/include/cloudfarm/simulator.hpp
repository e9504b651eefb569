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
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "cloudfarm/economics.hpp"
#include "cloudfarm/random.hpp"
#include "cloudfarm/trace.hpp"

namespace cloudfarm {

/// Traffic parameters handed to a policy at a decision epoch. The service
/// rate is configuration, not measurement.
struct DemandEstimate {
    double premium_rate = 0.0;  // lambda1, jobs/hour
    double basic_rate = 0.0;    // lambda2, jobs/hour
    double service_rate = 1.0;  // mu, jobs/hour
};

enum class ServiceDistribution { exponential, deterministic, lognormal };

inline const char* to_string(ServiceDistribution d) {
    switch (d) {
        case ServiceDistribution::exponential: return "exponential";
        case ServiceDistribution::deterministic: return "deterministic";
        default: return "lognormal";
    }
}

inline ServiceDistribution service_distribution_from_string(const std::string& name) {
    if (name == "exponential") return ServiceDistribution::exponential;
    if (name == "deterministic") return ServiceDistribution::deterministic;
    if (name == "lognormal") return ServiceDistribution::lognormal;
    throw std::invalid_argument("unknown service distribution: " + name);
}

struct SimConfig {
    int total_servers = 1000;
    double epoch_hours = 2.0;
    double service_rate = 0.4;  // mu; mean job length 1/mu hours
    ServiceDistribution service_distribution = ServiceDistribution::exponential;
    double lognormal_sigma = 1.0;
    ModelKind routing = ModelKind::overflow;
    std::uint64_t seed = 1;
    double warmup_hours = 24.0;

    void validate() const {
        if (total_servers < 0) throw std::invalid_argument("SimConfig: negative server count");
        if (!(epoch_hours > 0)) throw std::invalid_argument("SimConfig: epoch length must be positive");
        if (!(service_rate > 0)) throw std::invalid_argument("SimConfig: service rate must be positive");
        if (!(warmup_hours >= 0)) throw std::invalid_argument("SimConfig: negative warmup");
    }
};

/// Everything measured over one epoch of simulated time.
struct EpochStats {
    int epoch = 0;
    double start_hour = 0.0;
    double hours = 0.0;
    long premium_arrivals = 0;
    long basic_arrivals = 0;
    long premium_accepted = 0;
    long basic_accepted = 0;
    long premium_lost = 0;
    long basic_lost = 0;
    double pool1_busy_hours = 0.0;
    double pool1_idle_hours = 0.0;
    double pool2_busy_hours = 0.0;
    double pool2_idle_hours = 0.0;
    double energy_kwh = 0.0;    // facility energy, PUE included
    double charges = 0.0;       // $
    double energy_cost = 0.0;   // $
    double indirect_cost = 0.0; // $
    double penalties = 0.0;     // $
    double net_revenue = 0.0;   // charges - energy_cost - penalties - indirect_cost
    Allocation allocation{};
};

/// Arrival rates measured over a finished epoch.
inline DemandEstimate measure_rates(const EpochStats& stats, double epoch_hours,
                                    double service_rate) {
    if (!(epoch_hours > 0)) throw std::invalid_argument("measure_rates: epoch length must be positive");
    return DemandEstimate{static_cast<double>(stats.premium_arrivals) / epoch_hours,
                          static_cast<double>(stats.basic_arrivals) / epoch_hours, service_rate};
}

/// A (possibly stateful) allocation rule invoked once per epoch with the
/// rates measured over the previous epoch.
class EpochPolicy {
public:
    virtual ~EpochPolicy() = default;
    virtual Allocation decide(const DemandEstimate& estimate) = 0;
    virtual std::string name() const = 0;
};

namespace detail {

// Next arrival of a piecewise-constant-rate Poisson process at or after t.
// Exponential gaps are redrawn at each hour boundary (memorylessness makes
// the restart exact), so the draw sequence depends only on the trace and
// the stream seed, never on policy decisions.
inline double next_arrival(Rng& rng, const std::vector<double>& rates, double t) {
    const double horizon = static_cast<double>(rates.size());
    while (t < horizon) {
        const auto hour = static_cast<std::size_t>(t);
        const double rate = rates[hour];
        if (rate <= 0.0) {
            t = static_cast<double>(hour + 1);
            continue;
        }
        const double candidate = t + rng.exponential(rate);
        if (candidate < static_cast<double>(hour + 1)) return candidate;
        t = static_cast<double>(hour + 1);
    }
    return std::numeric_limits<double>::infinity();
}

struct Departure {
    double time;
    int pool;   // 1 or 2
    int klass;  // 1 premium, 2 basic
    bool operator>(const Departure& other) const { return time > other.time; }
};

inline double draw_service(Rng& rng, const SimConfig& config) {
    switch (config.service_distribution) {
        case ServiceDistribution::exponential:
            return rng.exponential(config.service_rate);
        case ServiceDistribution::deterministic:
            return 1.0 / config.service_rate;
        case ServiceDistribution::lognormal: {
            const double sigma = config.lognormal_sigma;
            const double m = std::log(1.0 / config.service_rate) - 0.5 * sigma * sigma;
            return std::exp(m + sigma * rng.normal());
        }
    }
    return 1.0 / config.service_rate;
}

}  // namespace detail

/// Event-driven simulation of the two-pool farm over a trace.
///
/// Premium jobs go to pool 1 and, with overflow routing, spill to pool 2
/// when pool 1 is saturated; basic jobs only ever use pool 2. A job finding
/// no idle server in its admissible pools is lost (with penalty if
/// premium). Reallocation at epoch boundaries is instantaneous for idle
/// servers; busy servers scheduled to power off finish their job first and
/// power off on completion. Charges accrue per occupied server-hour at the
/// class rate; energy integrates the idle floor per powered-on server-hour
/// plus the CPU increment per occupied server-hour, scaled by PUE.
inline std::vector<EpochStats> run_simulation(const Trace& trace, EpochPolicy& policy,
                                              const EconomicParams& econ, const SimConfig& sim) {
    sim.validate();
    econ.validate();
    if (trace.empty()) throw std::invalid_argument("run_simulation: empty trace");
    for (std::size_t h = 0; h < trace.hours(); ++h) {
        if (trace.premium_rate[h] < 0 || trace.basic_rate[h] < 0) {
            throw std::invalid_argument("run_simulation: negative rate in trace");
        }
    }

    Rng arrivals1(mix_seed(sim.seed, 1));
    Rng arrivals2(mix_seed(sim.seed, 2));
    Rng service1(mix_seed(sim.seed, 3));
    Rng service2(mix_seed(sim.seed, 4));

    const double end_time = static_cast<double>(trace.hours());
    const double busy_increment = econ.cpu_util * (econ.busy_power - econ.idle_power);

    std::priority_queue<detail::Departure, std::vector<detail::Departure>, std::greater<>> departures;
    int busy1 = 0;       // premium jobs on pool-1 servers
    int busy2_prem = 0;  // premium overflow jobs on pool-2 servers
    int busy2_basic = 0; // basic jobs on pool-2 servers

    Allocation alloc = policy.decide(
        DemandEstimate{trace.premium_rate[0], trace.basic_rate[0], sim.service_rate});
    alloc.validate();
    if (alloc.total_servers != sim.total_servers) {
        throw std::invalid_argument("run_simulation: policy allocation for a different farm size");
    }

    std::vector<EpochStats> result;
    EpochStats epoch;
    epoch.allocation = alloc;
    double epoch_start = 0.0;
    double epoch_end = std::min(sim.epoch_hours, end_time);

    double next1 = detail::next_arrival(arrivals1, trace.premium_rate, 0.0);
    double next2 = detail::next_arrival(arrivals2, trace.basic_rate, 0.0);
    double now = 0.0;

    const auto integrate_to = [&](double t) {
        const double dt = t - now;
        if (dt <= 0.0) return;
        const int on1 = std::max(alloc.premium_servers, busy1);
        const int on2 = std::max(alloc.shared_servers, busy2_prem + busy2_basic);
        const int busy2 = busy2_prem + busy2_basic;
        epoch.pool1_busy_hours += busy1 * dt;
        epoch.pool1_idle_hours += (on1 - busy1) * dt;
        epoch.pool2_busy_hours += busy2 * dt;
        epoch.pool2_idle_hours += (on2 - busy2) * dt;
        epoch.energy_kwh +=
            ((on1 + on2) * econ.idle_power + (busy1 + busy2) * busy_increment) * econ.pue * dt /
            1000.0;
        epoch.charges += (econ.premium_charge * (busy1 + busy2_prem) +
                          econ.basic_charge * busy2_basic) *
                         dt;
    };

    const auto close_epoch = [&](double t) {
        epoch.start_hour = epoch_start;
        epoch.hours = t - epoch_start;
        epoch.energy_cost = econ.electricity_price * epoch.energy_kwh;
        epoch.indirect_cost = econ.indirect_multiplier * epoch.energy_cost;
        epoch.net_revenue =
            epoch.charges - epoch.energy_cost - epoch.penalties - epoch.indirect_cost;
        epoch.allocation = alloc;
        result.push_back(epoch);
    };

    while (true) {
        const double next_departure =
            departures.empty() ? std::numeric_limits<double>::infinity() : departures.top().time;
        const double next_event = std::min({next1, next2, next_departure});

        if (epoch_end <= next_event) {              // close the epoch first on ties
            integrate_to(epoch_end);
            now = epoch_end;
            close_epoch(epoch_end);
            if (epoch_end >= end_time) break;
            const DemandEstimate measured = measure_rates(
                result.back(), result.back().hours, sim.service_rate);
            alloc = policy.decide(measured);
            alloc.validate();
            epoch = EpochStats{};
            epoch.epoch = static_cast<int>(result.size());
            epoch_start = epoch_end;
            epoch_end = std::min(epoch_end + sim.epoch_hours, end_time);
            continue;
        }

        integrate_to(next_event);
        now = next_event;

        if (next_departure <= std::min(next1, next2)) {
            const detail::Departure d = departures.top();
            departures.pop();
            if (d.pool == 1) {
                --busy1;
            } else if (d.klass == 1) {
                --busy2_prem;
            } else {
                --busy2_basic;
            }
            continue;
        }

        if (next1 <= next2) {  // premium arrival
            ++epoch.premium_arrivals;
            const double job_length = detail::draw_service(service1, sim);
            if (busy1 < alloc.premium_servers) {
                ++busy1;
                ++epoch.premium_accepted;
                departures.push({now + job_length, 1, 1});
            } else if (sim.routing == ModelKind::overflow &&
                       busy2_prem + busy2_basic < alloc.shared_servers) {
                ++busy2_prem;
                ++epoch.premium_accepted;
                departures.push({now + job_length, 2, 1});
            } else {
                ++epoch.premium_lost;
                epoch.penalties += econ.penalty;
            }
            next1 = detail::next_arrival(arrivals1, trace.premium_rate, next1);
        } else {  // basic arrival
            ++epoch.basic_arrivals;
            const double job_length = detail::draw_service(service2, sim);
            if (busy2_prem + busy2_basic < alloc.shared_servers) {
                ++busy2_basic;
                ++epoch.basic_accepted;
                departures.push({now + job_length, 2, 2});
            } else {
                ++epoch.basic_lost;
            }
            next2 = detail::next_arrival(arrivals2, trace.basic_rate, next2);
        }
    }
    return result;
}

/// Aggregate totals over a run, optionally skipping a warmup prefix.
struct SimSummary {
    std::string policy;
    long epochs = 0;
    double hours = 0.0;
    long premium_arrivals = 0;
    long basic_arrivals = 0;
    long premium_lost = 0;
    long basic_lost = 0;
    double energy_kwh = 0.0;
    double charges = 0.0;
    double energy_cost = 0.0;
    double indirect_cost = 0.0;
    double penalties = 0.0;
    double net_revenue = 0.0;

    double premium_loss_fraction() const {
        return premium_arrivals > 0 ? static_cast<double>(premium_lost) / premium_arrivals : 0.0;
    }
    double basic_loss_fraction() const {
        return basic_arrivals > 0 ? static_cast<double>(basic_lost) / basic_arrivals : 0.0;
    }
};

inline SimSummary summarize(const std::vector<EpochStats>& stats, double skip_hours = 0.0) {
    SimSummary s;
    for (const EpochStats& e : stats) {
        if (e.start_hour < skip_hours) continue;
        ++s.epochs;
        s.hours += e.hours;
        s.premium_arrivals += e.premium_arrivals;
        s.basic_arrivals += e.basic_arrivals;
        s.premium_lost += e.premium_lost;
        s.basic_lost += e.basic_lost;
        s.energy_kwh += e.energy_kwh;
        s.charges += e.charges;
        s.energy_cost += e.energy_cost;
        s.indirect_cost += e.indirect_cost;
        s.penalties += e.penalties;
        s.net_revenue += e.net_revenue;
    }
    return s;
}

}  // namespace cloudfarm
