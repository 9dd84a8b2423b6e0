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

#ifndef MMWNC_RUNNER_HPP
#define MMWNC_RUNNER_HPP

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bounds.hpp"
#include "random.hpp"
#include "scenario.hpp"
#include "service_bound.hpp"
#include "simulator.hpp"

namespace mmwnc {

struct ResultRow {
    std::size_t point = 0;
    double sweep_value = 0.0;
    StepSetting step;
    BoundKind kind = BoundKind::backlog;
    double epsilon = 0.0;
    bool stable = true;
    double bound_native = 0.0; // bits or slots
    double optimal_theta = 0.0;
    StabilityInterval stability;
    std::optional<Exceedance> sim;
};

struct ResultTable {
    Scenario scenario;
    std::vector<ResultRow> rows;
    std::vector<std::size_t> unstable_points;
    std::vector<std::optional<SimOutcome>> simulations; // per sweep point

    bool any_unstable() const { return !unstable_points.empty(); }
};

struct RunOptions {
    std::size_t threads = 0; // 0: hardware concurrency
    std::size_t sim_shards = 1;
};

namespace detail {

inline std::vector<ResultRow> evaluate_point(const Scenario& sc, const ScenarioPoint& pt,
                                             const std::optional<SimOutcome>& sim)
{
    std::vector<ResultRow> rows;
    for (const auto& step : sc.steps) {
        const ServiceCharacterization svc(pt.channel, make_discretization(sc, step),
                                          step.limit ? ServiceMode::limit : ServiceMode::discretized);
        for (double eps : pt.epsilons) {
            ResultRow r;
            r.point = pt.index;
            r.sweep_value = pt.sweep_value;
            r.step = step;
            r.kind = sc.kind;
            r.epsilon = eps;
            try {
                const auto b = compute_bound(pt.envelope, svc, BoundQuery{eps, sc.kind});
                r.bound_native = b.value;
                r.optimal_theta = b.optimal_theta;
                r.stability = b.stability_interval;
                if (sim) {
                    r.sim = sc.kind == BoundKind::backlog ? sim->backlog_exceedance(b.value)
                                                          : sim->delay_exceedance(b.value);
                }
            } catch (const UnstableError&) {
                r.stable = false;
            }
            rows.push_back(r);
        }
    }
    return rows;
}

} // namespace detail

// Points run concurrently; rows come out ordered by (point, step, epsilon).
inline ResultTable run_scenario(const Scenario& sc, const RunOptions& opt = {})
{
    sc.validate();
    const std::size_t n = sc.point_count();
    std::vector<std::vector<ResultRow>> per_point(n);
    std::vector<std::optional<SimOutcome>> sims(n);
    std::vector<std::exception_ptr> errors(n);

    // The epsilon axis changes nothing that the simulation sees.
    const bool shared_sim = sc.axis == SweepAxis::epsilon;

    auto simulate = [&](const ScenarioPoint& pt) {
        SimConfig cfg;
        cfg.horizon_slots = sc.sim.horizon_slots;
        cfg.replications = sc.sim.replications;
        cfg.master_seed = child_seed(sc.sim.seed, shared_sim ? 0 : pt.index);
        cfg.parallel_shards = opt.sim_shards;
        cfg.delay_cap_slots = sc.sim.delay_cap_slots;
        return run_experiment(pt.envelope, pt.channel, cfg);
    };

    std::optional<SimOutcome> common;
    if (sc.sim.enabled && shared_sim) common = simulate(make_point(sc, 0));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                const auto pt = make_point(sc, i);
                if (sc.sim.enabled) sims[i] = shared_sim ? common : std::optional<SimOutcome>(simulate(pt));
                per_point[i] = detail::evaluate_point(sc, pt, sims[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    std::size_t threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    ResultTable table;
    table.scenario = sc;
    table.simulations = std::move(sims);
    for (std::size_t i = 0; i < n; ++i) {
        bool unstable = false;
        for (auto& r : per_point[i]) {
            unstable = unstable || !r.stable;
            table.rows.push_back(std::move(r));
        }
        if (unstable) table.unstable_points.push_back(i);
    }
    return table;
}

// ---------------------------------------------------------------------------
// Output.

inline std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string hash_hex(std::uint64_t h)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline const char* bound_unit(BoundKind k) { return k == BoundKind::backlog ? "bits" : "seconds"; }

// Reported bound: bits for backlog, seconds for delay.
inline double reported_bound(const ResultRow& r, const Scenario& sc)
{
    return r.kind == BoundKind::backlog ? r.bound_native : r.bound_native * sc.slot_seconds;
}

inline std::string describe_point(const Scenario& sc, std::size_t index)
{
    if (sc.axis == SweepAxis::none) return "the scenario point";
    return std::string(to_string(sc.axis)) + "=" + format_number(sc.grid.at(index)) + " (point " +
           std::to_string(index) + ")";
}

inline void write_csv(std::ostream& os, const ResultTable& t)
{
    const auto& sc = t.scenario;
    os << "# " << kToolName << ' ' << kToolVersion << " scenario=" << hash_hex(scenario_hash(sc))
       << " schema=" << kCsvSchemaVersion << '\n';
    os << "sweep_axis,sweep_value,delta,kind,epsilon,status,bound,bound_unit,bound_slots,optimal_theta,"
          "stability_lower,stability_upper,sim_violation,sim_half_width,sim_replications\n";
    for (const auto& r : t.rows) {
        os << to_string(sc.axis) << ',' << (sc.axis == SweepAxis::none ? "" : format_number(r.sweep_value)) << ','
           << r.step.label() << ',' << to_string(r.kind) << ',' << format_number(r.epsilon) << ','
           << (r.stable ? "ok" : "unstable") << ',';
        if (r.stable) {
            os << format_number(reported_bound(r, sc)) << ',' << bound_unit(r.kind) << ','
               << (r.kind == BoundKind::delay ? format_number(r.bound_native) : "") << ','
               << format_number(r.optimal_theta) << ',' << format_number(r.stability.lower) << ','
               << format_number(r.stability.upper) << ',';
        } else {
            os << ',' << bound_unit(r.kind) << ",,,,,";
        }
        if (r.sim) os << format_number(r.sim->probability) << ',' << format_number(r.sim->half_width) << ','
                      << r.sim->trials;
        else os << ",,";
        os << '\n';
    }
}

inline nlohmann::json to_json(const ResultTable& t)
{
    const auto& sc = t.scenario;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : t.rows) {
        nlohmann::json j;
        j["point"] = r.point;
        if (sc.axis != SweepAxis::none) j["sweep_value"] = r.sweep_value;
        j["delta"] = r.step.limit ? nlohmann::json("limit") : nlohmann::json(r.step.delta);
        j["kind"] = to_string(r.kind);
        j["epsilon"] = r.epsilon;
        j["status"] = r.stable ? "ok" : "unstable";
        j["bound_unit"] = bound_unit(r.kind);
        if (r.stable) {
            j["bound"] = reported_bound(r, sc);
            if (r.kind == BoundKind::delay) j["bound_slots"] = r.bound_native;
            j["optimal_theta"] = r.optimal_theta;
            j["stability_interval"] = {r.stability.lower, r.stability.upper};
        }
        if (r.sim) {
            j["sim_violation"] = r.sim->probability;
            j["sim_half_width"] = r.sim->half_width;
            j["sim_replications"] = r.sim->trials;
        }
        rows.push_back(std::move(j));
    }
    nlohmann::json out;
    out["tool"] = kToolName;
    out["version"] = kToolVersion;
    out["schema"] = kCsvSchemaVersion;
    out["scenario_hash"] = hash_hex(scenario_hash(sc));
    out["scenario"] = to_json(sc);
    out["sweep_axis"] = to_string(sc.axis);
    out["unstable_points"] = t.unstable_points;
    out["rows"] = std::move(rows);
    return out;
}

inline void write_json(std::ostream& os, const ResultTable& t) { os << to_json(t).dump(2) << '\n'; }

} // namespace mmwnc

#endif
