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

#ifndef MMWNC_SCENARIO_HPP
#define MMWNC_SCENARIO_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bounds.hpp"
#include "channel.hpp"
#include "errors.hpp"
#include "inverse_moment.hpp"

namespace mmwnc {

inline constexpr const char* kToolName = "mmwave-nc";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kCsvSchemaVersion = 1;

enum class SweepAxis { none, rate, kappa, sigma, epsilon };

inline const char* to_string(SweepAxis a)
{
    switch (a) {
        case SweepAxis::none: return "none";
        case SweepAxis::rate: return "rate";
        case SweepAxis::kappa: return "kappa";
        case SweepAxis::sigma: return "sigma";
        case SweepAxis::epsilon: return "epsilon";
    }
    return "none";
}

inline SweepAxis parse_sweep_axis(const std::string& s, const std::string& field = "sweep.axis")
{
    if (s == "none") return SweepAxis::none;
    if (s == "rate") return SweepAxis::rate;
    if (s == "kappa") return SweepAxis::kappa;
    if (s == "sigma") return SweepAxis::sigma;
    if (s == "epsilon") return SweepAxis::epsilon;
    throw ConfigError(field, "unknown sweep axis '" + s + "' (none|rate|kappa|sigma|epsilon)");
}

inline BoundKind parse_bound_kind(const std::string& s, const std::string& field = "query.kind")
{
    if (s == "backlog") return BoundKind::backlog;
    if (s == "delay") return BoundKind::delay;
    throw ConfigError(field, "unknown bound kind '" + s + "' (backlog|delay)");
}

// One discretization choice: a lattice step, or the delta -> 0 limit.
struct StepSetting {
    bool limit = false;
    double delta = 1e-2;

    std::string label() const
    {
        if (limit) return "limit";
        std::ostringstream os;
        os.precision(10);
        os << delta;
        return os.str();
    }

    bool operator==(const StepSetting&) const = default;
};

struct SimSettings {
    bool enabled = false;
    std::size_t replications = 10'000;
    std::uint64_t seed = 1;
    std::size_t horizon_slots = 2000;
    std::size_t delay_cap_slots = 10'000;

    bool operator==(const SimSettings&) const = default;
};

struct Scenario {
    std::string name = "scenario";

    // Channel. When link_budget is present, kappa_db is derived from it.
    double kappa_db = 25.0;
    std::optional<LinkBudget> link_budget;
    double sigma_db = 8.0;
    double bandwidth_hz = 500e6;
    double slot_seconds = 1.0;

    // Arrivals.
    double rate_gbps = 1.0;
    double burst_bits = 0.0;

    // Discretization.
    std::vector<StepSetting> steps{StepSetting{}};
    double tail_mass_tol = 1e-12;
    std::size_t max_terms = 10'000'000;
    double uniform_span = 100.0;

    // Query.
    BoundKind kind = BoundKind::backlog;
    std::vector<double> epsilons{1e-3};

    SweepAxis axis = SweepAxis::none;
    std::vector<double> grid;

    SimSettings sim;

    bool operator==(const Scenario&) const = default;

    double effective_kappa_db() const { return link_budget ? compute_kappa(*link_budget) : kappa_db; }

    std::size_t point_count() const { return axis == SweepAxis::none ? 1 : grid.size(); }

    void validate() const
    {
        auto require = [](bool ok, const char* field, const char* what) {
            if (!ok) throw ConfigError(field, what);
        };
        require(std::isfinite(kappa_db), "channel.kappa_db", "must be finite");
        if (link_budget) {
            try {
                link_budget->validate();
            } catch (const DomainError& e) {
                throw ConfigError("channel.link_budget", e.what());
            }
        }
        require(sigma_db >= 0.0 && std::isfinite(sigma_db), "channel.sigma_db", "must be >= 0");
        require(bandwidth_hz > 0.0, "channel.bandwidth_hz", "must be positive");
        require(slot_seconds > 0.0, "channel.slot_seconds", "must be positive");
        require(rate_gbps >= 0.0 && std::isfinite(rate_gbps), "arrival.rate_gbps", "must be >= 0");
        require(burst_bits >= 0.0 && std::isfinite(burst_bits), "arrival.burst_bits", "must be >= 0");
        require(!steps.empty(), "discretization.delta", "must not be empty");
        for (const auto& s : steps) require(s.limit || s.delta > 0.0, "discretization.delta", "steps must be positive");
        require(tail_mass_tol > 0.0 && tail_mass_tol < 1.0, "discretization.tail_mass_tol", "must lie in (0, 1)");
        require(max_terms >= 1, "discretization.max_terms", "must be >= 1");
        require(uniform_span > 0.0, "discretization.uniform_span", "must be positive");
        if (axis != SweepAxis::epsilon) {
            require(!epsilons.empty(), "query.epsilon", "must not be empty");
            for (double e : epsilons) require(e > 0.0 && e < 1.0, "query.epsilon", "values must lie in (0, 1)");
        }
        if (axis != SweepAxis::none) {
            require(!grid.empty(), "sweep.values", "must not be empty");
            bool up = true, down = true;
            for (std::size_t i = 1; i < grid.size(); ++i) {
                up = up && grid[i] > grid[i - 1];
                down = down && grid[i] < grid[i - 1];
            }
            require(up || down, "sweep.values", "must be strictly monotone");
            for (double v : grid) {
                switch (axis) {
                    case SweepAxis::rate: require(v >= 0.0, "sweep.values", "rates must be >= 0"); break;
                    case SweepAxis::sigma: require(v >= 0.0, "sweep.values", "sigma must be >= 0"); break;
                    case SweepAxis::epsilon:
                        require(v > 0.0 && v < 1.0, "sweep.values", "epsilon must lie in (0, 1)");
                        break;
                    default: require(std::isfinite(v), "sweep.values", "must be finite"); break;
                }
            }
        } else {
            require(grid.empty(), "sweep.values", "must be empty when axis is none");
        }
        require(sim.replications >= 1, "simulation.replications", "must be >= 1");
        require(sim.horizon_slots >= 1, "simulation.horizon_slots", "must be >= 1");
        require(sim.delay_cap_slots >= 1, "simulation.delay_cap_slots", "must be >= 1");
    }
};

// Scenario with one sweep point applied.
struct ScenarioPoint {
    std::size_t index = 0;
    double sweep_value = 0.0;
    ShadowingChannel channel;
    AffineEnvelope envelope;
    std::vector<double> epsilons;
};

inline double gbps_to_bits_per_slot(double gbps, double slot_seconds) { return gbps * 1e9 * slot_seconds; }

inline ScenarioPoint make_point(const Scenario& sc, std::size_t index)
{
    ScenarioPoint p;
    p.index = index;
    p.channel = ShadowingChannel{sc.effective_kappa_db(), sc.sigma_db, sc.bandwidth_hz, sc.slot_seconds};
    double rate = sc.rate_gbps;
    p.epsilons = sc.epsilons;
    if (sc.axis != SweepAxis::none) {
        p.sweep_value = sc.grid.at(index);
        switch (sc.axis) {
            case SweepAxis::rate: rate = p.sweep_value; break;
            case SweepAxis::kappa: p.channel.kappa_db = p.sweep_value; break;
            case SweepAxis::sigma: p.channel.sigma_db = p.sweep_value; break;
            case SweepAxis::epsilon: p.epsilons = {p.sweep_value}; break;
            case SweepAxis::none: break;
        }
    }
    p.envelope = AffineEnvelope{sc.burst_bits, gbps_to_bits_per_slot(rate, sc.slot_seconds)};
    return p;
}

inline DiscretizationConfig make_discretization(const Scenario& sc, const StepSetting& step)
{
    DiscretizationConfig c;
    c.step_delta = step.limit ? 1e-2 : step.delta;
    c.tail_mass_tol = sc.tail_mass_tol;
    c.max_terms = sc.max_terms;
    c.uniform_span = sc.uniform_span;
    return c;
}

// ---------------------------------------------------------------------------
// JSON form.

namespace detail {

using json = nlohmann::json;

inline void reject_unknown(const json& obj, const std::string& where, std::initializer_list<const char*> known)
{
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw ConfigError(where.empty() ? it.key() : where + "." + it.key(), "unknown field");
    }
}

inline const json* member(const json& obj, const std::string& where, const char* key)
{
    if (!obj.is_object()) throw ConfigError(where, "expected an object");
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

inline std::string join(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

inline double get_number(const json& obj, const std::string& where, const char* key, double fallback)
{
    const json* v = member(obj, where, key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(join(where, key), "expected a number");
    return v->get<double>();
}

inline std::uint64_t get_count(const json& obj, const std::string& where, const char* key, std::uint64_t fallback)
{
    const json* v = member(obj, where, key);
    if (!v) return fallback;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    if (v->is_number_float()) {
        const double d = v->get<double>();
        if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    throw ConfigError(join(where, key), "expected a non-negative integer");
}

inline bool get_bool(const json& obj, const std::string& where, const char* key, bool fallback)
{
    const json* v = member(obj, where, key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(join(where, key), "expected true or false");
    return v->get<bool>();
}

inline std::string get_string(const json& obj, const std::string& where, const char* key, const std::string& fallback)
{
    const json* v = member(obj, where, key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(join(where, key), "expected a string");
    return v->get<std::string>();
}

inline std::vector<double> get_numbers(const json& obj, const std::string& where, const char* key,
                                       const std::vector<double>& fallback)
{
    const json* v = member(obj, where, key);
    if (!v) return fallback;
    std::vector<double> out;
    if (v->is_number()) return {v->get<double>()};
    if (!v->is_array()) throw ConfigError(join(where, key), "expected a number or an array of numbers");
    for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError(join(where, key), "expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

inline StepSetting parse_step(const json& v, const std::string& field)
{
    if (v.is_string()) {
        if (v.get<std::string>() == "limit") return StepSetting{true, 1e-2};
        throw ConfigError(field, "expected a positive step or \"limit\"");
    }
    if (!v.is_number()) throw ConfigError(field, "expected a positive step or \"limit\"");
    return StepSetting{false, v.get<double>()};
}

} // namespace detail

inline StepSetting parse_step_setting(const std::string& text)
{
    if (text == "limit") return StepSetting{true, 1e-2};
    try {
        std::size_t used = 0;
        const double d = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return StepSetting{false, d};
    } catch (const std::exception&) {
        throw ConfigError("--delta", "expected a positive number or 'limit', got '" + text + "'");
    }
}

inline Scenario scenario_from_json(const nlohmann::json& j)
{
    using namespace detail;
    Scenario sc;
    if (!j.is_object()) throw ConfigError("", "scenario must be a JSON object");
    reject_unknown(j, "", {"name", "channel", "arrival", "discretization", "query", "sweep", "simulation"});
    sc.name = get_string(j, "", "name", sc.name);

    if (const json* ch = member(j, "", "channel")) {
        reject_unknown(*ch, "channel", {"kappa_db", "sigma_db", "bandwidth_hz", "slot_seconds", "link_budget"});
        if (ch->contains("kappa_db") && ch->contains("link_budget"))
            throw ConfigError("channel", "give either kappa_db or link_budget, not both");
        sc.kappa_db = get_number(*ch, "channel", "kappa_db", sc.kappa_db);
        sc.sigma_db = get_number(*ch, "channel", "sigma_db", sc.sigma_db);
        sc.slot_seconds = get_number(*ch, "channel", "slot_seconds", sc.slot_seconds);
        if (const json* lb = member(*ch, "channel", "link_budget")) {
            const std::string w = "channel.link_budget";
            reject_unknown(*lb, w,
                           {"transmit_power_dbm", "antenna_gain_tx_db", "antenna_gain_rx_db", "noise_density_dbm_per_mhz",
                            "bandwidth_hz", "distance_m", "intercept_alpha_db", "slope_beta"});
            LinkBudget b;
            b.transmit_power_dbm = get_number(*lb, w, "transmit_power_dbm", b.transmit_power_dbm);
            b.antenna_gain_tx_db = get_number(*lb, w, "antenna_gain_tx_db", b.antenna_gain_tx_db);
            b.antenna_gain_rx_db = get_number(*lb, w, "antenna_gain_rx_db", b.antenna_gain_rx_db);
            b.noise_density_dbm_per_mhz = get_number(*lb, w, "noise_density_dbm_per_mhz", b.noise_density_dbm_per_mhz);
            b.bandwidth_hz = get_number(*lb, w, "bandwidth_hz", get_number(*ch, "channel", "bandwidth_hz", b.bandwidth_hz));
            b.distance_m = get_number(*lb, w, "distance_m", b.distance_m);
            b.intercept_alpha_db = get_number(*lb, w, "intercept_alpha_db", b.intercept_alpha_db);
            b.slope_beta = get_number(*lb, w, "slope_beta", b.slope_beta);
            sc.link_budget = b;
            sc.bandwidth_hz = b.bandwidth_hz;
        }
        sc.bandwidth_hz = get_number(*ch, "channel", "bandwidth_hz", sc.bandwidth_hz);
    }

    if (const json* ar = member(j, "", "arrival")) {
        reject_unknown(*ar, "arrival", {"rate_gbps", "burst_bits"});
        sc.rate_gbps = get_number(*ar, "arrival", "rate_gbps", sc.rate_gbps);
        sc.burst_bits = get_number(*ar, "arrival", "burst_bits", sc.burst_bits);
    }

    if (const json* d = member(j, "", "discretization")) {
        reject_unknown(*d, "discretization", {"delta", "tail_mass_tol", "max_terms", "uniform_span"});
        if (const json* delta = member(*d, "discretization", "delta")) {
            sc.steps.clear();
            if (delta->is_array()) {
                for (const auto& e : *delta) sc.steps.push_back(parse_step(e, "discretization.delta"));
            } else {
                sc.steps.push_back(parse_step(*delta, "discretization.delta"));
            }
        }
        sc.tail_mass_tol = get_number(*d, "discretization", "tail_mass_tol", sc.tail_mass_tol);
        sc.max_terms = get_count(*d, "discretization", "max_terms", sc.max_terms);
        sc.uniform_span = get_number(*d, "discretization", "uniform_span", sc.uniform_span);
    }

    if (const json* q = member(j, "", "query")) {
        reject_unknown(*q, "query", {"kind", "epsilon"});
        sc.kind = parse_bound_kind(get_string(*q, "query", "kind", to_string(sc.kind)));
        sc.epsilons = get_numbers(*q, "query", "epsilon", sc.epsilons);
    }

    if (const json* sw = member(j, "", "sweep")) {
        reject_unknown(*sw, "sweep", {"axis", "values"});
        sc.axis = parse_sweep_axis(get_string(*sw, "sweep", "axis", "none"));
        sc.grid = get_numbers(*sw, "sweep", "values", {});
    }

    if (const json* s = member(j, "", "simulation")) {
        reject_unknown(*s, "simulation", {"enabled", "replications", "seed", "horizon_slots", "delay_cap_slots"});
        sc.sim.enabled = get_bool(*s, "simulation", "enabled", sc.sim.enabled);
        sc.sim.replications = get_count(*s, "simulation", "replications", sc.sim.replications);
        sc.sim.seed = get_count(*s, "simulation", "seed", sc.sim.seed);
        sc.sim.horizon_slots = get_count(*s, "simulation", "horizon_slots", sc.sim.horizon_slots);
        sc.sim.delay_cap_slots = get_count(*s, "simulation", "delay_cap_slots", sc.sim.delay_cap_slots);
    }

    sc.validate();
    return sc;
}

// Parses scenario text; syntax errors report line and column.
inline Scenario parse_scenario(const std::string& text)
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col),
                          std::string("JSON syntax error: ") + e.what());
    }
    return scenario_from_json(j);
}

inline nlohmann::json to_json(const Scenario& sc)
{
    nlohmann::json j;
    j["name"] = sc.name;
    auto& ch = j["channel"];
    if (sc.link_budget) {
        const auto& b = *sc.link_budget;
        ch["link_budget"] = {{"transmit_power_dbm", b.transmit_power_dbm},
                             {"antenna_gain_tx_db", b.antenna_gain_tx_db},
                             {"antenna_gain_rx_db", b.antenna_gain_rx_db},
                             {"noise_density_dbm_per_mhz", b.noise_density_dbm_per_mhz},
                             {"bandwidth_hz", b.bandwidth_hz},
                             {"distance_m", b.distance_m},
                             {"intercept_alpha_db", b.intercept_alpha_db},
                             {"slope_beta", b.slope_beta}};
    } else {
        ch["kappa_db"] = sc.kappa_db;
    }
    ch["sigma_db"] = sc.sigma_db;
    ch["bandwidth_hz"] = sc.bandwidth_hz;
    ch["slot_seconds"] = sc.slot_seconds;
    j["arrival"] = {{"rate_gbps", sc.rate_gbps}, {"burst_bits", sc.burst_bits}};
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : sc.steps) {
        if (s.limit) steps.push_back("limit");
        else steps.push_back(s.delta);
    }
    j["discretization"] = {{"delta", steps},
                           {"tail_mass_tol", sc.tail_mass_tol},
                           {"max_terms", sc.max_terms},
                           {"uniform_span", sc.uniform_span}};
    j["query"] = {{"kind", to_string(sc.kind)}, {"epsilon", sc.epsilons}};
    j["sweep"] = {{"axis", to_string(sc.axis)}, {"values", sc.grid}};
    j["simulation"] = {{"enabled", sc.sim.enabled},
                       {"replications", sc.sim.replications},
                       {"seed", sc.sim.seed},
                       {"horizon_slots", sc.sim.horizon_slots},
                       {"delay_cap_slots", sc.sim.delay_cap_slots}};
    return j;
}

// FNV-1a over the canonical (key-sorted) JSON text.
inline std::uint64_t scenario_hash(const Scenario& sc)
{
    const std::string text = to_json(sc).dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace mmwnc

#endif
