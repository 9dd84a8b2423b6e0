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

#ifndef MMWNC_SIMULATOR_HPP
#define MMWNC_SIMULATOR_HPP

// Slotted fluid queue driven by i.i.d. shadowed capacity. Slot k (0-based)
// sees arrivals a_k and capacity s_k; B(k+1) = max(B(k) + a_k - s_k, 0) with
// B(0) = 0. The virtual delay W(t) is the number of further slots needed to
// serve everything that arrived before t, i.e. the smallest w with
// s_t + ... + s_{t+w-1} >= B(t) (FCFS keeps the old backlog in front).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <thread>
#include <vector>

#include "arrival.hpp"
#include "channel.hpp"
#include "errors.hpp"
#include "random.hpp"

namespace mmwnc {

struct SimConfig {
    std::size_t horizon_slots = 2000;
    std::size_t replications = 1000;
    std::uint64_t master_seed = 1;
    std::size_t parallel_shards = 1;
    std::size_t delay_cap_slots = 10'000;

    void validate() const
    {
        if (horizon_slots < 1) throw DomainError("simulation: horizon must be >= 1 slot");
        if (replications < 1) throw DomainError("simulation: replications must be >= 1");
        if (parallel_shards < 1) throw DomainError("simulation: parallel_shards must be >= 1");
        if (delay_cap_slots < 1) throw DomainError("simulation: delay cap must be >= 1 slot");
    }
};

struct ReplicationResult {
    double backlog_bits = 0.0;
    std::uint64_t delay_slots = 0;
    bool censored = false; // delay search hit the cap; delay_slots holds the cap

    bool operator==(const ReplicationResult&) const = default;
};

// Full trajectory, for checking queue identities on short horizons.
struct SamplePath {
    std::vector<double> arrivals;   // a_k
    std::vector<double> service;    // s_k
    std::vector<double> backlog;    // B(k), k = 0..t
    std::vector<double> departures; // D(0, k), k = 0..t
};

template <std::uniform_random_bit_generator G>
SamplePath simulate_path(std::span<const double> arrivals, const ShadowingChannel& ch, G& gen)
{
    SnrSampler snr(ch);
    SamplePath p;
    p.arrivals.assign(arrivals.begin(), arrivals.end());
    p.service.reserve(arrivals.size());
    p.backlog.reserve(arrivals.size() + 1);
    p.departures.reserve(arrivals.size() + 1);
    double b = 0.0;
    double d = 0.0;
    p.backlog.push_back(0.0);
    p.departures.push_back(0.0);
    for (double a : arrivals) {
        const double s = capacity_bits_per_slot(ch, snr(gen));
        const double served = std::min(b + a, s);
        b = b + a - served;
        d += served;
        p.service.push_back(s);
        p.backlog.push_back(b);
        p.departures.push_back(d);
    }
    return p;
}

template <std::uniform_random_bit_generator G>
ReplicationResult run_replication(std::span<const double> arrivals, const ShadowingChannel& ch, G& gen,
                                  std::size_t delay_cap_slots = 10'000)
{
    if (arrivals.empty()) throw DomainError("replication: horizon must be >= 1 slot");
    SnrSampler snr(ch);
    double b = 0.0;
    for (double a : arrivals) b = std::max(b + a - capacity_bits_per_slot(ch, snr(gen)), 0.0);

    ReplicationResult r;
    r.backlog_bits = b;
    // Relative slack absorbs rounding in the accumulated backlog.
    const double target = b * (1.0 - 1e-12);
    double drained = 0.0;
    while (drained < target) {
        if (r.delay_slots >= delay_cap_slots) {
            r.censored = true;
            break;
        }
        drained += capacity_bits_per_slot(ch, snr(gen));
        ++r.delay_slots;
    }
    return r;
}

template <std::uniform_random_bit_generator G>
ReplicationResult run_replication(const AffineEnvelope& env, const ShadowingChannel& ch, std::size_t horizon_slots,
                                  G& gen, std::size_t delay_cap_slots = 10'000)
{
    const auto arrivals = generate_arrivals(env, horizon_slots);
    return run_replication(std::span<const double>(arrivals), ch, gen, delay_cap_slots);
}

// Empirical exceedance P(X > threshold) with a Wilson score half-width.
struct Exceedance {
    double threshold = 0.0;
    double probability = 0.0;
    double half_width = 0.0;
    std::size_t count = 0;
    std::size_t trials = 0;
};

inline double wilson_half_width(std::size_t count, std::size_t trials, double z = 1.959963984540054)
{
    if (trials == 0) return 0.0;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(count) / n;
    const double z2 = z * z;
    return z / (1.0 + z2 / n) * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
}

// Binomial standard error sqrt(eps (1 - eps) / n) at a target probability.
inline double binomial_se(double eps, std::size_t trials)
{
    return std::sqrt(eps * (1.0 - eps) / static_cast<double>(trials));
}

class SimOutcome {
  public:
    SimOutcome() = default;
    explicit SimOutcome(std::vector<ReplicationResult> reps) : reps_(std::move(reps)) {}

    std::size_t replications() const noexcept { return reps_.size(); }
    const std::vector<ReplicationResult>& samples() const noexcept { return reps_; }

    std::vector<double> backlog_samples() const
    {
        std::vector<double> out;
        out.reserve(reps_.size());
        for (const auto& r : reps_) out.push_back(r.backlog_bits);
        return out;
    }

    std::vector<std::uint64_t> delay_samples() const
    {
        std::vector<std::uint64_t> out;
        out.reserve(reps_.size());
        for (const auto& r : reps_) out.push_back(r.delay_slots);
        return out;
    }

    Exceedance backlog_exceedance(double threshold) const
    {
        std::size_t n = 0;
        for (const auto& r : reps_) n += r.backlog_bits > threshold;
        return make(threshold, n);
    }

    // Censored samples exceed every finite threshold.
    Exceedance delay_exceedance(double threshold_slots) const
    {
        std::size_t n = 0;
        for (const auto& r : reps_) n += r.censored || static_cast<double>(r.delay_slots) > threshold_slots;
        return make(threshold_slots, n);
    }

    std::vector<Exceedance> backlog_ccdf(std::span<const double> thresholds) const
    {
        std::vector<Exceedance> out;
        for (double t : thresholds) out.push_back(backlog_exceedance(t));
        return out;
    }

    std::vector<Exceedance> delay_ccdf(std::span<const double> thresholds) const
    {
        std::vector<Exceedance> out;
        for (double t : thresholds) out.push_back(delay_exceedance(t));
        return out;
    }

    // One line per replication: index, backlog (bits), delay (slots), censored flag.
    void write_samples(std::ostream& os) const
    {
        os << "replication,backlog_bits,delay_slots,censored\n";
        const auto old = os.precision(17);
        for (std::size_t i = 0; i < reps_.size(); ++i)
            os << i << ',' << reps_[i].backlog_bits << ',' << reps_[i].delay_slots << ',' << (reps_[i].censored ? 1 : 0)
               << '\n';
        os.precision(old);
    }

    bool operator==(const SimOutcome&) const = default;

  private:
    Exceedance make(double threshold, std::size_t count) const
    {
        Exceedance e;
        e.threshold = threshold;
        e.count = count;
        e.trials = reps_.size();
        e.probability = reps_.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(reps_.size());
        e.half_width = wilson_half_width(count, reps_.size());
        return e;
    }

    std::vector<ReplicationResult> reps_;
};

// Replication i always uses child_rng(master_seed, i); shards only split the
// index range, so results do not depend on parallel_shards.
inline SimOutcome run_experiment(const AffineEnvelope& env, const ShadowingChannel& ch, const SimConfig& cfg)
{
    cfg.validate();
    env.validate();
    ch.validate();
    const auto arrivals = generate_arrivals(env, cfg.horizon_slots);
    std::vector<ReplicationResult> reps(cfg.replications);

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng gen = child_rng(cfg.master_seed, i);
            reps[i] = run_replication(std::span<const double>(arrivals), ch, gen, cfg.delay_cap_slots);
        }
    };

    const std::size_t shards = std::min(cfg.parallel_shards, cfg.replications);
    if (shards <= 1) {
        run_range(0, cfg.replications);
    } else {
        std::vector<std::jthread> workers;
        const std::size_t chunk = (cfg.replications + shards - 1) / shards;
        for (std::size_t s = 0; s < shards; ++s) {
            const std::size_t begin = s * chunk;
            const std::size_t end = std::min(cfg.replications, begin + chunk);
            if (begin < end) workers.emplace_back(run_range, begin, end);
        }
    }
    return SimOutcome(std::move(reps));
}

} // namespace mmwnc

#endif
