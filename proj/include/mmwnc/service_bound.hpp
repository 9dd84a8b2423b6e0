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

#ifndef MMWNC_SERVICE_BOUND_HPP
#define MMWNC_SERVICE_BOUND_HPP

#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>

#include "channel.hpp"
#include "errors.hpp"
#include "inverse_moment.hpp"

namespace mmwnc {

// How q(theta) is obtained: the lattice bound at the configured delta, or the
// exact expectation (the delta -> 0 limit of the lattice bound).
enum class ServiceMode { discretized, limit };

// A non-negative quantity held by its logarithm; exponentiate on demand.
struct LogScalar {
    double log = 0.0;
    double value() const { return std::exp(log); }
};

// Rounds theta down to 12 significant digits; q is evaluated at the rounded
// value, so the memoized function does not depend on call order. q decreases
// in theta, so rounding down keeps it an upper bound.
inline double memo_key(double theta)
{
    if (!(theta > 0.0) || !std::isfinite(theta)) return theta;
    const int exp10 = static_cast<int>(std::floor(std::log10(theta)));
    const double scale = std::pow(10.0, 11 - exp10);
    return std::min(theta, std::floor(theta * scale) / scale);
}

// Service of an i.i.d. shadowed link: q(theta) bounds E[exp(-theta C_k)] for
// the per-slot capacity C_k (bits), so E[exp(-theta S(s,t))] <= q(theta)^(t-s).
// Copies share the lattice table and the q cache.
class ServiceCharacterization {
  public:
    explicit ServiceCharacterization(ShadowingChannel channel, DiscretizationConfig config = {},
                                     ServiceMode mode = ServiceMode::discretized)
        : channel_(channel), config_(config), mode_(mode), state_(std::make_shared<State>())
    {
        channel_.validate();
        config_.validate();
    }

    const ShadowingChannel& channel() const noexcept { return channel_; }
    const DiscretizationConfig& config() const noexcept { return config_; }
    ServiceMode mode() const noexcept { return mode_; }

    // Exponent applied to (1 + gamma) for a given theta in 1/bits.
    double exponent(double theta) const noexcept { return theta * channel_.bits_per_nat(); }

    InverseMoment q(double theta) const
    {
        if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("q(theta): theta must be positive");
        const double key = memo_key(theta);
        {
            std::shared_lock lock(state_->mutex);
            if (auto it = state_->cache.find(key); it != state_->cache.end()) return it->second;
        }
        const InverseMoment v = compute(key);
        std::unique_lock lock(state_->mutex);
        return state_->cache.emplace(key, v).first->second;
    }

    double log_q(double theta) const { return q(theta).log_value; }

    std::size_t cache_size() const
    {
        std::shared_lock lock(state_->mutex);
        return state_->cache.size();
    }

  private:
    struct State {
        std::once_flag table_once;
        std::optional<LatticeTable> table;
        mutable std::shared_mutex mutex;
        std::map<double, InverseMoment> cache;
    };

    InverseMoment compute(double theta) const
    {
        const double e = exponent(theta);
        if (channel_.deterministic()) {
            // Point-mass SNR: the bound is exact.
            return exact_inverse_moment(PointMassLaw{channel_.median_snr()}, e);
        }
        if (mode_ == ServiceMode::limit) return exact_inverse_moment(channel_, e);
        if (config_.refine_to_limit) return lemma1_bound(channel_, e, config_);
        std::call_once(state_->table_once, [this] {
            state_->table.emplace([this](double x) { return snr_cdf(channel_, x); },
                                  [this](double x) { return snr_survival(channel_, x); }, config_);
        });
        return state_->table->evaluate(e, config_.tail_mass_tol);
    }

    ShadowingChannel channel_;
    DiscretizationConfig config_;
    ServiceMode mode_;
    std::shared_ptr<State> state_;
};

inline InverseMoment q_of_theta(const ServiceCharacterization& svc, double theta) { return svc.q(theta); }

// Bound on E[exp(-theta S(0, n))] = q(theta)^n, kept in log form.
inline LogScalar service_mgf_bound(const ServiceCharacterization& svc, double theta, std::size_t n_slots)
{
    if (!(theta > 0.0)) throw DomainError("service MGF bound: theta must be positive");
    if (n_slots == 0) return LogScalar{0.0};
    return LogScalar{static_cast<double>(n_slots) * svc.log_q(theta)};
}

// Independent but not identically distributed slots: prod_k q_k(theta), one
// channel per slot. Each factor is computed from scratch.
inline LogScalar service_mgf_bound(std::span<const ShadowingChannel> per_slot, double theta,
                                   const DiscretizationConfig& config,
                                   ServiceMode mode = ServiceMode::discretized)
{
    if (!(theta > 0.0)) throw DomainError("service MGF bound: theta must be positive");
    double total = 0.0;
    for (const auto& ch : per_slot) total += ServiceCharacterization(ch, config, mode).log_q(theta);
    return LogScalar{total};
}

} // namespace mmwnc

#endif
