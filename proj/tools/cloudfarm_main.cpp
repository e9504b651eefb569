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

#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cloudfarm/epoch_policies.hpp"
#include "cloudfarm/policies.hpp"
#include "cloudfarm/report.hpp"
#include "cloudfarm/simulator.hpp"
#include "cloudfarm/trace.hpp"

namespace {

using namespace cloudfarm;

void print_error(const std::string& message) {
    const bool color = ::isatty(::fileno(stderr)) != 0 && std::getenv("NO_COLOR") == nullptr;
    std::cerr << (color ? "\x1b[31merror:\x1b[0m " : "error: ") << message << "\n";
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> items;
    std::string item;
    std::istringstream in(csv);
    while (std::getline(in, item, ',')) {
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

// Parameters shared by all subcommands; names double as config-file keys.
struct CommonOptions {
    int S = 1000;
    double rho1 = 300.0;
    double rho2 = 250.0;
    double mu = 0.4;
    double c1 = 0.03;
    double c2 = 0.085;
    double d = 0.2;
    double r = 0.1;
    double e1 = 59.0;
    double e2 = 83.5;
    double pue = 1.7;
    double cpu_util = 0.7;
    double indirect_multiplier = 0.0;
    std::string model = "overflow";
    double tau = 1e-5;
    double percentile_x = 0.95;
    bool ceiling_power = false;
    double delta = 0.11;  // static forecast-error margin for one-shot solves
    double epoch_length = 2.0;
    double warmup = 24.0;
    std::string service_dist = "exponential";
    double lognormal_sigma = 1.0;
    std::uint64_t seed = 1;

    void register_options(CLI::App& app) {
        app.add_option("--S", S, "Total number of servers")->capture_default_str();
        app.add_option("--rho1", rho1, "Premium offered load (Erlangs)")->capture_default_str();
        app.add_option("--rho2", rho2, "Basic offered load (Erlangs)")->capture_default_str();
        app.add_option("--mu", mu, "Service rate (jobs/hour)")->capture_default_str();
        app.add_option("--c1", c1, "Premium charge ($/server-hour)")->capture_default_str();
        app.add_option("--c2", c2, "Basic charge ($/server-hour)")->capture_default_str();
        app.add_option("--d", d, "Penalty per lost premium job ($)")->capture_default_str();
        app.add_option("--r", r, "Electricity price ($/kWh)")->capture_default_str();
        app.add_option("--e1", e1, "Idle server power (W)")->capture_default_str();
        app.add_option("--e2", e2, "Busy server power at full CPU (W)")->capture_default_str();
        app.add_option("--pue", pue, "Power usage effectiveness")->capture_default_str();
        app.add_option("--cpu_util", cpu_util, "Mean CPU demand of a running job")
            ->capture_default_str();
        app.add_option("--indirect_multiplier", indirect_multiplier,
                       "Indirect cost as a multiple of electricity cost")
            ->capture_default_str();
        app.add_option("--model", model, "Revenue model: isolated or overflow")
            ->capture_default_str();
        app.add_option("--tau", tau, "Premium blocking bound for penalty-capping")
            ->capture_default_str();
        app.add_option("--percentile_x", percentile_x, "Forecast-error percentile")
            ->capture_default_str();
        app.add_flag("--ceiling_power", ceiling_power,
                     "Round busy-server equivalents up in the power term");
        app.add_option("--delta", delta, "Static error margin for one-shot percentile solves")
            ->capture_default_str();
        app.add_option("--epoch_length", epoch_length, "Policy invocation period (hours)")
            ->capture_default_str();
        app.add_option("--warmup", warmup, "Warmup hours excluded from summaries")
            ->capture_default_str();
        app.add_option("--service_dist", service_dist,
                       "Job length distribution: exponential, deterministic, lognormal")
            ->capture_default_str();
        app.add_option("--lognormal_sigma", lognormal_sigma, "Sigma of the lognormal job length")
            ->capture_default_str();
        app.add_option("--seed", seed, "Simulation seed")->capture_default_str();
    }

    EconomicParams econ() const {
        EconomicParams p;
        p.premium_charge = c1;
        p.basic_charge = c2;
        p.penalty = d;
        p.electricity_price = r;
        p.idle_power = e1;
        p.busy_power = e2;
        p.pue = pue;
        p.cpu_util = cpu_util;
        p.indirect_multiplier = indirect_multiplier;
        p.validate();
        return p;
    }

    PolicyConfig policy_config() const {
        PolicyConfig c;
        c.model = model_from_string(model);
        c.blocking_target = tau;
        c.percentile = percentile_x;
        c.ceiling_power = ceiling_power;
        c.validate();
        return c;
    }

    SimConfig sim_config() const {
        SimConfig c;
        c.total_servers = S;
        c.epoch_hours = epoch_length;
        c.service_rate = mu;
        c.service_distribution = service_distribution_from_string(service_dist);
        c.lognormal_sigma = lognormal_sigma;
        c.seed = seed;
        c.warmup_hours = warmup;
        c.validate();
        return c;
    }

    void stamp(RunManifest& manifest) const {
        manifest.set("S", S);
        manifest.set("rho1", rho1);
        manifest.set("rho2", rho2);
        manifest.set("mu", mu);
        manifest.set("c1", c1);
        manifest.set("c2", c2);
        manifest.set("d", d);
        manifest.set("r", r);
        manifest.set("e1", e1);
        manifest.set("e2", e2);
        manifest.set("pue", pue);
        manifest.set("cpu_util", cpu_util);
        manifest.set("indirect_multiplier", indirect_multiplier);
        manifest.set("model", model);
        manifest.set("tau", tau);
        manifest.set("percentile_x", percentile_x);
        manifest.set("ceiling_power", ceiling_power);
        manifest.set("delta", delta);
        manifest.set("epoch_length", epoch_length);
        manifest.set("warmup", warmup);
        manifest.set("service_dist", service_dist);
        manifest.set("lognormal_sigma", lognormal_sigma);
        manifest.set("seed", seed);
    }
};

struct SyntheticOptions {
    int days = 30;
    double base1 = 120.0;
    double base2 = 100.0;
    double daily_amp = 0.3;
    double weekly_amp = 0.1;
    double noise_cv = 0.05;
    double spike_prob = 0.005;
    double spike_mult = 0.5;
    std::uint64_t trace_seed = 7;

    void register_options(CLI::App& app) {
        app.add_option("--days", days, "Trace length in days")->capture_default_str();
        app.add_option("--base1", base1, "Premium base rate (jobs/hour)")->capture_default_str();
        app.add_option("--base2", base2, "Basic base rate (jobs/hour)")->capture_default_str();
        app.add_option("--daily_amp", daily_amp, "Daily pattern amplitude")->capture_default_str();
        app.add_option("--weekly_amp", weekly_amp, "Weekly pattern amplitude")
            ->capture_default_str();
        app.add_option("--noise_cv", noise_cv, "Lognormal noise coefficient of variation")
            ->capture_default_str();
        app.add_option("--spike_prob", spike_prob, "Per-hour spike probability")
            ->capture_default_str();
        app.add_option("--spike_mult", spike_mult, "Spike magnitude (rate is scaled by 1+this)")
            ->capture_default_str();
        app.add_option("--trace_seed", trace_seed, "Trace generator seed")->capture_default_str();
    }

    SyntheticTraceOptions to_options() const {
        SyntheticTraceOptions o;
        o.days = days;
        o.base_premium = base1;
        o.base_basic = base2;
        o.daily_amplitude = daily_amp;
        o.weekly_amplitude = weekly_amp;
        o.noise_cv = noise_cv;
        o.spike_probability = spike_prob;
        o.spike_magnitude = spike_mult;
        o.seed = trace_seed;
        return o;
    }

    void stamp(RunManifest& manifest) const {
        manifest.set("days", days);
        manifest.set("base1", base1);
        manifest.set("base2", base2);
        manifest.set("daily_amp", daily_amp);
        manifest.set("weekly_amp", weekly_amp);
        manifest.set("noise_cv", noise_cv);
        manifest.set("spike_prob", spike_prob);
        manifest.set("spike_mult", spike_mult);
        manifest.set("trace_seed", trace_seed);
    }
};

void write_manifest_file(const RunManifest& manifest, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest: " + path);
    out << manifest.serialize() << "\n";
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    return out;
}

// Evaluate one named policy at one operating point under the configured model.
std::string solve_one(const std::string& policy, const CommonOptions& opt) {
    const EconomicParams econ = opt.econ();
    const PolicyConfig config = opt.policy_config();
    Allocation alloc;
    if (policy == "optimal") {
        alloc = optimize_hill_climb(opt.S, opt.rho1, opt.rho2, opt.mu, econ, config).allocation;
    } else if (policy == "exhaustive") {
        alloc = optimize_exhaustive(opt.S, opt.rho1, opt.rho2, opt.mu, econ, config).allocation;
    } else if (policy == "penalty-capping") {
        alloc = penalty_capping(opt.S, opt.rho1, opt.rho2, opt.mu, econ, config.blocking_target);
    } else if (policy == "percentile") {
        const int n1 = percentile_allocation(opt.rho1, opt.delta);
        const int n2 = percentile_allocation(opt.rho2, opt.delta);
        alloc = clamp_proportional(opt.S, n1, n2);
    } else if (policy == "percentile-optimal") {
        alloc = percentile_optimal(opt.S, opt.rho1, opt.rho2, opt.delta, opt.mu, econ, config)
                    .allocation;
    } else if (policy == "always-on") {
        alloc = always_on(opt.S);
    } else {
        throw CLI::ValidationError("--policy", "unknown policy: " + policy);
    }
    RevenueModel model(opt.rho1, opt.rho2, opt.mu, econ, config.model, config.ceiling_power);
    return solve_row(policy, config.model, alloc, model.evaluate(alloc));
}

int run_solve(const CommonOptions& opt, const std::string& policy, const std::string& out_path) {
    RunManifest manifest("solve");
    opt.stamp(manifest);
    manifest.set("policy", policy);
    manifest.set_output("out", out_path.empty() ? "-" : out_path);

    const std::string row = solve_one(policy, opt);
    std::ostringstream body;
    body << manifest.header_comment() << "\n" << kSolveHeader << "\n" << row << "\n";
    if (out_path.empty()) {
        std::cout << body.str();
    } else {
        open_output(out_path) << body.str();
        write_manifest_file(manifest, out_path + ".manifest.json");
    }
    return 0;
}

int run_sweep(const CommonOptions& opt, const std::string& param, double from, double to,
              double step, const std::string& policies_csv, const std::string& out_path) {
    if (param != "d" && param != "r") {
        throw CLI::ValidationError("--param", "sweep parameter must be 'd' or 'r'");
    }
    if (!(step > 0) || to < from) {
        throw CLI::ValidationError("--step", "empty sweep range");
    }
    const std::vector<std::string> policies = split_list(policies_csv);
    if (policies.empty()) throw CLI::ValidationError("--policies", "no policies requested");

    std::vector<double> points;
    for (double v = from; v <= to + 1e-12; v += step) points.push_back(v);

    RunManifest manifest("sweep");
    opt.stamp(manifest);
    manifest.set("param", param);
    manifest.set("from", from);
    manifest.set("to", to);
    manifest.set("step", step);
    manifest.set("policies", policies_csv);
    manifest.set_output("out", out_path);

    // Points are independent; evaluate them concurrently and emit in order.
    std::vector<std::future<std::vector<std::string>>> futures;
    futures.reserve(points.size());
    for (const double value : points) {
        futures.push_back(std::async(std::launch::async, [&, value] {
            CommonOptions local = opt;
            if (param == "d") {
                local.d = value;
            } else {
                local.r = value;
            }
            std::vector<std::string> rows;
            rows.reserve(policies.size());
            for (const std::string& policy : policies) {
                rows.push_back(format_number(value) + "," + solve_one(policy, local));
            }
            return rows;
        }));
    }

    std::ofstream out = open_output(out_path);
    out << manifest.header_comment() << "\n" << param << "," << kSolveHeader << "\n";
    for (auto& future : futures) {
        for (const std::string& row : future.get()) out << row << "\n";
    }
    write_manifest_file(manifest, out_path + ".manifest.json");
    return 0;
}

int run_simulate(const CommonOptions& opt, const SyntheticOptions& synth,
                 const std::string& trace_path, const std::string& policies_csv,
                 const std::string& out_prefix) {
    const std::vector<std::string> policies = split_list(policies_csv);
    if (policies.empty()) throw CLI::ValidationError("--policies", "no policies requested");

    Trace trace;
    if (trace_path.empty()) {
        trace = gen_synthetic(synth.to_options());
    } else {
        trace = load_trace(trace_path);
    }

    RunManifest manifest("simulate");
    opt.stamp(manifest);
    synth.stamp(manifest);
    manifest.set("trace", trace_path.empty() ? "<synthetic>" : trace_path);
    manifest.set("policies", policies_csv);
    manifest.set_output("out_prefix", out_prefix);

    const EconomicParams econ = opt.econ();
    const PolicyConfig config = opt.policy_config();

    std::ofstream epochs_out = open_output(out_prefix + "_epochs.csv");
    std::ofstream summary_out = open_output(out_prefix + "_summary.csv");
    epochs_out << manifest.header_comment() << "\n" << kEpochHeader << "\n";
    summary_out << manifest.header_comment() << "\n" << kSummaryHeader << "\n";

    for (const std::string& name : policies) {
        auto policy = make_policy(name, opt.S, econ, config);
        SimConfig sim = opt.sim_config();
        sim.routing = routing_for_policy(name);
        const std::vector<EpochStats> stats = run_simulation(trace, *policy, econ, sim);
        for (const EpochStats& e : stats) epochs_out << epoch_row(name, e) << "\n";
        SimSummary summary = summarize(stats, sim.warmup_hours);
        summary.policy = name;
        summary_out << summary_row(summary) << "\n";
    }
    write_manifest_file(manifest, out_prefix + ".manifest.json");
    return 0;
}

int run_gen_trace(const SyntheticOptions& synth, const std::string& out_path) {
    RunManifest manifest("gen-trace");
    synth.stamp(manifest);
    manifest.set_output("out", out_path);

    const Trace trace = gen_synthetic(synth.to_options());
    std::ofstream out = open_output(out_path);
    out << manifest.header_comment() << "\n";
    write_trace_csv(out, trace);
    write_manifest_file(manifest, out_path + ".manifest.json");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cloudfarm: revenue-maximizing server allocation for two-class server farms"};
    app.require_subcommand(1);
    app.fallthrough();  // shared parameters may follow the subcommand name
    app.set_config("--config", "", "Read defaults from a key = value file");
    app.allow_config_extras(CLI::config_extras_mode::ignore);

    CommonOptions opt;
    opt.register_options(app);

    std::string policy = "optimal";
    std::string solve_out;
    CLI::App* solve = app.add_subcommand("solve", "Evaluate one policy at one operating point");
    solve->add_option("--policy", policy,
                      "optimal, exhaustive, penalty-capping, percentile, percentile-optimal, "
                      "always-on")
        ->capture_default_str();
    solve->add_option("--out", solve_out, "Write the CSV here instead of stdout");

    std::string sweep_param = "d";
    double sweep_from = 0.0;
    double sweep_to = 5.0;
    double sweep_step = 0.1;
    std::string sweep_policies = "optimal";
    std::string sweep_out = "sweep.csv";
    CLI::App* sweep = app.add_subcommand("sweep", "Sweep d or r and solve at every point");
    sweep->add_option("--param", sweep_param, "Swept parameter: d or r")->capture_default_str();
    sweep->add_option("--from", sweep_from, "Range start")->capture_default_str();
    sweep->add_option("--to", sweep_to, "Range end")->capture_default_str();
    sweep->add_option("--step", sweep_step, "Range step")->capture_default_str();
    sweep->add_option("--policies", sweep_policies, "Comma-separated policy list")
        ->capture_default_str();
    sweep->add_option("--out", sweep_out, "Output CSV path")->capture_default_str();

    SyntheticOptions synth;
    std::string sim_trace_path;
    std::string sim_policies = "optimal,penalty-capping,percentile,percentile-optimal,always-on,isolated";
    std::string sim_out_prefix = "sim";
    CLI::App* simulate =
        app.add_subcommand("simulate", "Replay a trace through the simulator per policy");
    simulate->add_option("--trace", sim_trace_path, "Trace CSV (default: synthetic trace)");
    synth.register_options(*simulate);
    simulate->add_option("--policies", sim_policies, "Comma-separated policy list")
        ->capture_default_str();
    simulate->add_option("--out_prefix", sim_out_prefix, "Prefix for the output files")
        ->capture_default_str();

    std::string gen_out = "trace.csv";
    CLI::App* gen = app.add_subcommand("gen-trace", "Write a synthetic trace CSV");
    synth.register_options(*gen);
    gen->add_option("--out", gen_out, "Output CSV path")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (solve->parsed()) return run_solve(opt, policy, solve_out);
        if (sweep->parsed()) {
            return run_sweep(opt, sweep_param, sweep_from, sweep_to, sweep_step, sweep_policies,
                             sweep_out);
        }
        if (simulate->parsed()) {
            return run_simulate(opt, synth, sim_trace_path, sim_policies, sim_out_prefix);
        }
        if (gen->parsed()) return run_gen_trace(synth, gen_out);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::invalid_argument& e) {
        print_error(e.what());
        return 2;
    } catch (const std::exception& e) {
        print_error(e.what());
        return 1;
    }
    return 0;
}
