// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <mmwnc/mmwnc.hpp>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitUnstable = 2;

std::vector<std::string> split(const std::string& text, char sep = ',')
{
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep)) {
        const auto b = cur.find_first_not_of(" \t");
        const auto e = cur.find_last_not_of(" \t");
        parts.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
    }
    return parts;
}

std::vector<double> parse_list(const std::string& text, const std::string& flag)
{
    std::vector<double> out;
    for (const auto& p : split(text)) {
        if (p.empty()) throw mmwnc::ConfigError(flag, "empty entry in list '" + text + "'");
        try {
            std::size_t used = 0;
            out.push_back(std::stod(p, &used));
            if (used != p.size()) throw std::invalid_argument(p);
        } catch (const std::exception&) {
            throw mmwnc::ConfigError(flag, "not a number: '" + p + "'");
        }
    }
    return out;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw mmwnc::ConfigError("--scenario", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// "prefix.csv" -> "prefix.<i>.csv" when there is more than one point.
std::string sample_path(const std::string& base, std::size_t index, std::size_t count)
{
    if (count == 1) return base;
    const auto dot = base.find_last_of('.');
    const auto slash = base.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return base + "." + std::to_string(index);
    return base.substr(0, dot) + "." + std::to_string(index) + base.substr(dot);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Probabilistic backlog and delay bounds for a shadowed mmWave link"};
    app.set_version_flag("--version", std::string(mmwnc::kToolVersion));

    std::string scenario_path;
    std::string sweep;
    std::optional<std::string> epsilon;
    std::optional<std::string> delta;
    std::optional<std::string> kind;
    bool simulate = false;
    std::optional<std::uint64_t> replications;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> horizon;
    std::string out_path;
    std::string format = "csv";
    std::size_t threads = 0;
    std::string dump_samples;
    bool print_scenario = false;

    app.add_option("--scenario", scenario_path, "Scenario file (JSON)");
    app.add_option("--sweep", sweep, "Sweep axis, optionally with values: AXIS or AXIS=v1,v2,...");
    app.add_option("--epsilon", epsilon, "Comma-separated violation probabilities");
    app.add_option("--delta", delta, "Discretization step(s) or 'limit', comma-separated");
    app.add_option("--kind", kind, "Bound kind: backlog or delay");
    app.add_flag("--simulate", simulate, "Run the Monte Carlo validation");
    app.add_option("--replications", replications, "Simulation replications");
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--horizon", horizon, "Simulation horizon in slots");
    app.add_option("--out", out_path, "Output file (default stdout)");
    app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--threads", threads, "Worker threads for sweep points (0 = all cores)");
    app.add_option("--dump-samples", dump_samples, "Write raw simulation samples as CSV");
    app.add_flag("--print-scenario", print_scenario, "Print the effective scenario and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    mmwnc::Scenario sc;
    try {
        if (!scenario_path.empty()) sc = mmwnc::parse_scenario(read_file(scenario_path));

        if (!sweep.empty()) {
            const auto eq = sweep.find('=');
            sc.axis = mmwnc::parse_sweep_axis(sweep.substr(0, eq), "--sweep");
            if (eq != std::string::npos) sc.grid = parse_list(sweep.substr(eq + 1), "--sweep");
            if (sc.axis == mmwnc::SweepAxis::none) sc.grid.clear();
        }
        if (epsilon) {
            if (epsilon->empty()) throw mmwnc::ConfigError("--epsilon", "list must not be empty");
            sc.epsilons = parse_list(*epsilon, "--epsilon");
        }
        if (delta) {
            sc.steps.clear();
            for (const auto& p : split(*delta)) sc.steps.push_back(mmwnc::parse_step_setting(p));
        }
        if (kind) sc.kind = mmwnc::parse_bound_kind(*kind, "--kind");
        if (simulate) sc.sim.enabled = true;
        if (replications) sc.sim.replications = *replications;
        if (seed) sc.sim.seed = *seed;
        if (horizon) sc.sim.horizon_slots = *horizon;
        sc.validate();
    } catch (const mmwnc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    }

    if (print_scenario) {
        std::cout << mmwnc::to_json(sc).dump(2) << '\n';
        return kExitOk;
    }

    mmwnc::ResultTable table;
    try {
        table = mmwnc::run_scenario(sc, mmwnc::RunOptions{threads, 1});
    } catch (const mmwnc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const mmwnc::DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary);
        if (!file) {
            std::cerr << "error: cannot write '" << out_path << "'\n";
            return kExitUsage;
        }
    }
    std::ostream& os = out_path.empty() ? std::cout : file;
    if (format == "json") mmwnc::write_json(os, table);
    else mmwnc::write_csv(os, table);

    if (!dump_samples.empty()) {
        const std::size_t n = table.simulations.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (!table.simulations[i]) continue;
            const auto path = sample_path(dump_samples, i, n);
            std::ofstream s(path, std::ios::binary);
            if (!s) {
                std::cerr << "error: cannot write '" << path << "'\n";
                return kExitUsage;
            }
            table.simulations[i]->write_samples(s);
        }
    }

    if (table.any_unstable()) {
        for (auto i : table.unstable_points)
            std::cerr << "unstable: arrival rate exceeds what the channel can sustain at "
                      << mmwnc::describe_point(sc, i) << '\n';
        return kExitUnstable;
    }
    return kExitOk;
}
