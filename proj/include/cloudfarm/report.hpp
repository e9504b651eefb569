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

#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "cloudfarm/economics.hpp"
#include "cloudfarm/simulator.hpp"

namespace cloudfarm {

inline constexpr std::string_view kVersion = "0.1.0";

/// Deterministic double formatting for machine-readable output.
inline std::string format_number(double value) {
    char buffer[48];
    std::snprintf(buffer, sizeof(buffer), "%.10g", value);
    return buffer;
}

/// FNV-1a 64-bit; fingerprints run manifests.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (const char c : data) {
        hash ^= static_cast<unsigned char>(c);
        hash *= 0x100000001b3ull;
    }
    return hash;
}

/// Resolved parameters of one CLI run. Serialized next to every output so
/// results can be reproduced; the hash of the serialized form heads each
/// output file.
class RunManifest {
public:
    RunManifest(std::string subcommand) {
        set("subcommand", subcommand);
        set("version", std::string(kVersion));
    }

    void set(const std::string& key, const std::string& value) { entries_[key] = value; }
    void set(const std::string& key, double value) { entries_[key] = format_number(value); }
    void set(const std::string& key, int value) { entries_[key] = std::to_string(value); }
    void set(const std::string& key, long value) { entries_[key] = std::to_string(value); }
    void set(const std::string& key, std::uint64_t value) { entries_[key] = std::to_string(value); }
    void set(const std::string& key, bool value) { entries_[key] = value ? "true" : "false"; }

    /// Output locations are recorded but excluded from the hash: they do not
    /// influence the computed results, and runs that differ only in where
    /// they write must produce byte-identical bodies.
    void set_output(const std::string& key, const std::string& path) { outputs_[key] = path; }

    /// Canonical serialization: sorted keys, JSON object, one line.
    std::string serialize() const {
        std::string out = "{";
        bool first = true;
        for (const auto& [key, value] : entries_) {
            if (!first) out += ",";
            first = false;
            out += "\"" + key + "\":\"" + value + "\"";
        }
        for (const auto& [key, value] : outputs_) {
            if (!first) out += ",";
            first = false;
            out += "\"" + key + "\":\"" + value + "\"";
        }
        out += "}";
        return out;
    }

    std::string hash_hex() const {
        std::string hashed = "{";
        bool first = true;
        for (const auto& [key, value] : entries_) {
            if (!first) hashed += ",";
            first = false;
            hashed += "\"" + key + "\":\"" + value + "\"";
        }
        hashed += "}";
        char buffer[20];
        std::snprintf(buffer, sizeof(buffer), "%016llx",
                      static_cast<unsigned long long>(fnv1a64(hashed)));
        return buffer;
    }

    std::string header_comment() const { return "# manifest_hash=" + hash_hex(); }

private:
    std::map<std::string, std::string> entries_;
    std::map<std::string, std::string> outputs_;
};

inline constexpr std::string_view kSolveHeader =
    "policy,model,n1,n2,n_off,R,R1,R2,T1,T2,D,P_kW,L1,L2";

inline std::string solve_row(const std::string& policy, ModelKind model, const Allocation& alloc,
                             const RevenueBreakdown& b) {
    std::string row = policy;
    row += ",";
    row += to_string(model);
    row += "," + std::to_string(alloc.premium_servers);
    row += "," + std::to_string(alloc.shared_servers);
    row += "," + std::to_string(alloc.off_servers());
    row += "," + format_number(b.revenue);
    row += "," + format_number(b.premium_revenue);
    row += "," + format_number(b.basic_revenue);
    row += "," + format_number(b.premium_throughput);
    row += "," + format_number(b.basic_throughput);
    row += "," + format_number(b.penalty_rate);
    row += "," + format_number((b.premium_power + b.basic_power) / 1000.0);
    row += "," + format_number(b.premium_lost);
    row += "," + format_number(b.basic_lost);
    return row;
}

inline constexpr std::string_view kEpochHeader =
    "policy,epoch,start_hour,hours,n1,n2,n_off,arrivals1,arrivals2,accepted1,accepted2,"
    "lost1,lost2,busy_hours1,idle_hours1,busy_hours2,idle_hours2,energy_kwh,charges,"
    "energy_cost,indirect_cost,penalties,net_revenue";

inline std::string epoch_row(const std::string& policy, const EpochStats& e) {
    std::string row = policy;
    row += "," + std::to_string(e.epoch);
    row += "," + format_number(e.start_hour);
    row += "," + format_number(e.hours);
    row += "," + std::to_string(e.allocation.premium_servers);
    row += "," + std::to_string(e.allocation.shared_servers);
    row += "," + std::to_string(e.allocation.off_servers());
    row += "," + std::to_string(e.premium_arrivals);
    row += "," + std::to_string(e.basic_arrivals);
    row += "," + std::to_string(e.premium_accepted);
    row += "," + std::to_string(e.basic_accepted);
    row += "," + std::to_string(e.premium_lost);
    row += "," + std::to_string(e.basic_lost);
    row += "," + format_number(e.pool1_busy_hours);
    row += "," + format_number(e.pool1_idle_hours);
    row += "," + format_number(e.pool2_busy_hours);
    row += "," + format_number(e.pool2_idle_hours);
    row += "," + format_number(e.energy_kwh);
    row += "," + format_number(e.charges);
    row += "," + format_number(e.energy_cost);
    row += "," + format_number(e.indirect_cost);
    row += "," + format_number(e.penalties);
    row += "," + format_number(e.net_revenue);
    return row;
}

inline constexpr std::string_view kSummaryHeader =
    "policy,epochs,hours,arrivals1,arrivals2,lost1,lost2,loss_pct1,loss_pct2,"
    "energy_kwh,charges,energy_cost,indirect_cost,penalties,net_revenue";

inline std::string summary_row(const SimSummary& s) {
    std::string row = s.policy;
    row += "," + std::to_string(s.epochs);
    row += "," + format_number(s.hours);
    row += "," + std::to_string(s.premium_arrivals);
    row += "," + std::to_string(s.basic_arrivals);
    row += "," + std::to_string(s.premium_lost);
    row += "," + std::to_string(s.basic_lost);
    row += "," + format_number(100.0 * s.premium_loss_fraction());
    row += "," + format_number(100.0 * s.basic_loss_fraction());
    row += "," + format_number(s.energy_kwh);
    row += "," + format_number(s.charges);
    row += "," + format_number(s.energy_cost);
    row += "," + format_number(s.indirect_cost);
    row += "," + format_number(s.penalties);
    row += "," + format_number(s.net_revenue);
    return row;
}

}  // namespace cloudfarm
