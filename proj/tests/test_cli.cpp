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

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout
};

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "cloudfarm_cli_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out = scratch_dir() / ("stdout_" + std::to_string(counter++) + ".txt");
    const std::string command = std::string(CLOUDFARM_CLI_PATH) + " " + args + " > " +
                                out.string() + " 2> " + out.string() + ".err";
    const int raw = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(out);
    std::stringstream buffer;
    buffer << in.rdbuf();
    result.output = buffer.str();
    return result;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace

TEST_CASE("solve prints one CSV row", "[cli]") {
    const CliResult r = run_cli("solve --policy always-on --S 100 --rho1 10 --rho2 10");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("# manifest_hash=") == 0);
    CHECK(r.output.find("policy,model,n1,n2,n_off,R,R1,R2,T1,T2,D,P_kW,L1,L2") != std::string::npos);
    CHECK(r.output.find("always-on,overflow,0,100,0,") != std::string::npos);
}

TEST_CASE("solve honors the model flag", "[cli]") {
    const CliResult r =
        run_cli("solve --policy optimal --model isolated --S 40 --rho1 8 --rho2 6");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find(",isolated,") != std::string::npos);
}

TEST_CASE("unknown policy is a usage error", "[cli]") {
    const CliResult r = run_cli("solve --policy nonsense --S 10");
    CHECK(r.exit_code == 2);
}

TEST_CASE("exhaustive guard is a usage error", "[cli]") {
    const CliResult r = run_cli("solve --policy exhaustive --S 600 --rho1 10 --rho2 10");
    CHECK(r.exit_code == 2);
}

TEST_CASE("gen-trace writes a reproducible file", "[cli]") {
    const fs::path out1 = scratch_dir() / "trace1.csv";
    const fs::path out2 = scratch_dir() / "trace2.csv";
    REQUIRE(run_cli("gen-trace --days 2 --trace_seed 7 --out " + out1.string()).exit_code == 0);
    REQUIRE(run_cli("gen-trace --days 2 --trace_seed 7 --out " + out2.string()).exit_code == 0);
    const std::string a = slurp(out1);
    const std::string b = slurp(out2);
    REQUIRE(!a.empty());
    CHECK(a == b);
    CHECK(a.find("# manifest_hash=") == 0);
    CHECK(a.find("hour,lambda1,lambda2") != std::string::npos);
    // 1 comment + 1 header + 48 rows
    CHECK(std::count(a.begin(), a.end(), '\n') == 50);
    CHECK(fs::exists(out1.string() + ".manifest.json"));
}

TEST_CASE("simulate runs the policy arms over a synthetic trace", "[cli]") {
    const fs::path prefix = scratch_dir() / "sim_small";
    const CliResult r = run_cli(
        "--S 30 --mu 0.4 --seed 5 simulate --days 2 --base1 3 --base2 4 "
        "--policies always-on,penalty-capping --out_prefix " + prefix.string());
    REQUIRE(r.exit_code == 0);
    const std::string epochs = slurp(fs::path(prefix.string() + "_epochs.csv"));
    const std::string summary = slurp(fs::path(prefix.string() + "_summary.csv"));
    CHECK(epochs.find("always-on,0,") != std::string::npos);
    CHECK(summary.find("penalty-capping,") != std::string::npos);
    CHECK(fs::exists(prefix.string() + ".manifest.json"));
}

TEST_CASE("simulate with a fixed seed is byte-identical", "[cli]") {
    const fs::path p1 = scratch_dir() / "rep1";
    const fs::path p2 = scratch_dir() / "rep2";
    const std::string args =
        "--S 25 --seed 42 simulate --days 2 --base1 4 --base2 5 --policies optimal,always-on "
        "--out_prefix ";
    REQUIRE(run_cli(args + p1.string()).exit_code == 0);
    REQUIRE(run_cli(args + p2.string()).exit_code == 0);
    CHECK(slurp(fs::path(p1.string() + "_epochs.csv")) ==
          slurp(fs::path(p2.string() + "_epochs.csv")));
    CHECK(slurp(fs::path(p1.string() + "_summary.csv")) ==
          slurp(fs::path(p2.string() + "_summary.csv")));
}

TEST_CASE("simulate rejects a broken trace with exit 1", "[cli]") {
    const fs::path bad = scratch_dir() / "bad.csv";
    std::ofstream(bad) << "hour,lambda1,lambda2\n0,5,-1\n";
    const CliResult r = run_cli("simulate --trace " + bad.string() + " --out_prefix " +
                                (scratch_dir() / "bad_run").string());
    CHECK(r.exit_code == 1);

    const fs::path empty = scratch_dir() / "empty.csv";
    std::ofstream(empty) << "";
    const CliResult e = run_cli("simulate --trace " + empty.string() + " --out_prefix " +
                                (scratch_dir() / "empty_run").string());
    CHECK(e.exit_code == 1);
}

TEST_CASE("sweep writes ordered rows per policy", "[cli]") {
    const fs::path out = scratch_dir() / "sweep_d.csv";
    const CliResult r = run_cli(
        "--S 30 --rho1 6 --rho2 8 sweep --param d --from 0 --to 0.4 --step 0.2 "
        "--policies optimal,always-on --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const std::string body = slurp(out);
    CHECK(body.find("d,policy,model,") != std::string::npos);
    // 3 points x 2 policies
    CHECK(std::count(body.begin(), body.end(), '\n') == 8);
    CHECK(body.find("0,always-on") != std::string::npos);
    CHECK(body.find("0.4,optimal") != std::string::npos);
}

TEST_CASE("sweep with a step larger than the range is a single point", "[cli]") {
    const fs::path out = scratch_dir() / "sweep_single.csv";
    const CliResult r = run_cli("--S 20 --rho1 3 --rho2 3 sweep --param r --from 0.1 --to 0.2 "
                                "--step 5 --policies optimal --out " + out.string());
    REQUIRE(r.exit_code == 0);
    const std::string body = slurp(out);
    CHECK(std::count(body.begin(), body.end(), '\n') == 3);
}

TEST_CASE("empty sweep range is a usage error", "[cli]") {
    const CliResult r = run_cli("sweep --param d --from 1 --to 0 --step 0.1 --out " +
                                (scratch_dir() / "never.csv").string());
    CHECK(r.exit_code == 2);
}

TEST_CASE("config file supplies defaults, flags override", "[cli]") {
    const fs::path cfg = scratch_dir() / "run.cfg";
    std::ofstream(cfg) << "S = 25\nrho1 = 2\nrho2 = 2\n";
    const CliResult from_file =
        run_cli("--config " + cfg.string() + " solve --policy always-on");
    REQUIRE(from_file.exit_code == 0);
    CHECK(from_file.output.find("always-on,overflow,0,25,0,") != std::string::npos);

    const CliResult overridden =
        run_cli("--config " + cfg.string() + " --S 12 solve --policy always-on");
    REQUIRE(overridden.exit_code == 0);
    CHECK(overridden.output.find("always-on,overflow,0,12,0,") != std::string::npos);
}
