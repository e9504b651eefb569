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
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cloudfarm/random.hpp"

namespace cloudfarm {

/// Hourly arrival-rate series for the two job classes. The hour index is
/// implicit: entry h covers [h, h+1).
struct Trace {
    std::vector<double> premium_rate;  // lambda1, jobs/hour
    std::vector<double> basic_rate;    // lambda2, jobs/hour

    std::size_t hours() const { return premium_rate.size(); }
    bool empty() const { return premium_rate.empty(); }
};

class TraceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

inline double parse_rate(const std::string& text, long line_number, const char* column) {
    std::size_t consumed = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &consumed);
    } catch (const std::exception&) {
        throw TraceError("line " + std::to_string(line_number) + ": " + column +
                         " is not a number: '" + text + "'");
    }
    if (consumed != text.size() || !std::isfinite(value)) {
        throw TraceError("line " + std::to_string(line_number) + ": " + column +
                         " is not a number: '" + text + "'");
    }
    return value;
}

}  // namespace detail

/// Parse the trace CSV format: header `hour,lambda1,lambda2`, one row per
/// hour with contiguous hour indexes from 0, nonnegative rates, LF or CRLF.
/// Malformed input fails hard with the offending 1-based line number.
inline Trace load_trace(std::istream& in) {
    std::string line;
    long line_number = 0;
    // Leading '#' lines (e.g. the manifest-hash comment on generated files)
    // are skipped; the header must be the first substantive line.
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_number;
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto header = detail::split_csv(line);
        if (header.size() != 3 || header[0] != "hour" || header[1] != "lambda1" ||
            header[2] != "lambda2") {
            throw TraceError("line " + std::to_string(line_number) +
                             ": expected header 'hour,lambda1,lambda2'");
        }
        have_header = true;
        break;
    }
    if (!have_header) throw TraceError("no samples: empty trace file");
    Trace trace;
    while (std::getline(in, line)) {
        ++line_number;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv(line);
        if (fields.size() != 3) {
            throw TraceError("line " + std::to_string(line_number) + ": expected 3 columns, got " +
                             std::to_string(fields.size()));
        }
        const double hour = detail::parse_rate(fields[0], line_number, "hour");
        if (hour != static_cast<double>(trace.hours())) {
            throw TraceError("line " + std::to_string(line_number) +
                             ": non-contiguous hour index (expected " +
                             std::to_string(trace.hours()) + ")");
        }
        const double lambda1 = detail::parse_rate(fields[1], line_number, "lambda1");
        const double lambda2 = detail::parse_rate(fields[2], line_number, "lambda2");
        if (lambda1 < 0 || lambda2 < 0) {
            throw TraceError("line " + std::to_string(line_number) + ": negative arrival rate");
        }
        trace.premium_rate.push_back(lambda1);
        trace.basic_rate.push_back(lambda2);
    }
    if (trace.empty()) throw TraceError("no samples: trace has a header but no rows");
    return trace;
}

inline Trace load_trace(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TraceError("cannot open trace file: " + path);
    return load_trace(in);
}

inline void write_trace_csv(std::ostream& out, const Trace& trace) {
    out << "hour,lambda1,lambda2\n";
    char buffer[64];
    for (std::size_t h = 0; h < trace.hours(); ++h) {
        std::snprintf(buffer, sizeof(buffer), "%zu,%.10g,%.10g\n", h, trace.premium_rate[h],
                      trace.basic_rate[h]);
        out << buffer;
    }
}

/// Parameters of the synthetic workload generator: a base rate modulated by
/// daily and weekly sinusoids, multiplicative lognormal noise, and rare
/// spike hours shared by both classes.
struct SyntheticTraceOptions {
    int days = 30;
    double base_premium = 120.0;     // jobs/hour
    double base_basic = 100.0;       // jobs/hour
    double daily_amplitude = 0.05;
    double weekly_amplitude = 0.1;
    double noise_cv = 0.05;
    double spike_probability = 0.005;  // per hour
    double spike_magnitude = 0.5;      // spike hours are scaled by 1 + this
    std::uint64_t seed = 7;

    void validate() const {
        if (days < 0 || base_premium < 0 || base_basic < 0 || daily_amplitude < 0 ||
            weekly_amplitude < 0 || noise_cv < 0 || spike_probability < 0 ||
            spike_magnitude < 0) {
            throw std::invalid_argument("SyntheticTraceOptions: fields must be nonnegative");
        }
    }
};

/// Deterministic synthetic trace with the configured patterns. Same options
/// (including seed) always produce the same trace.
inline Trace gen_synthetic(const SyntheticTraceOptions& options) {
    options.validate();
    constexpr double two_pi = 6.283185307179586476925286766559;
    Rng rng(mix_seed(options.seed, 0x7261636554726163ull));
    Trace trace;
    const long hours = static_cast<long>(options.days) * 24;
    trace.premium_rate.reserve(static_cast<std::size_t>(hours));
    trace.basic_rate.reserve(static_cast<std::size_t>(hours));
    for (long h = 0; h < hours; ++h) {
        const double spike_draw = rng.uniform();
        const double noise1 = rng.unit_mean_lognormal(options.noise_cv);
        const double noise2 = rng.unit_mean_lognormal(options.noise_cv);
        const double daily = 1.0 + options.daily_amplitude * std::sin(two_pi * h / 24.0);
        const double weekly = 1.0 + options.weekly_amplitude * std::sin(two_pi * h / 168.0);
        const double spike = spike_draw < options.spike_probability
                                 ? 1.0 + options.spike_magnitude
                                 : 1.0;
        const double shape = daily * weekly * spike;
        trace.premium_rate.push_back(std::max(0.0, options.base_premium * shape * noise1));
        trace.basic_rate.push_back(std::max(0.0, options.base_basic * shape * noise2));
    }
    return trace;
}

}  // namespace cloudfarm
