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

#ifndef MMWNC_ARRIVAL_HPP
#define MMWNC_ARRIVAL_HPP

#include <cstddef>
#include <vector>

#include "errors.hpp"

namespace mmwnc {

// (sigma(theta), rho(theta)) envelope with theta-independent burst and rate:
// ln E[exp(theta A(s,t))] <= theta * (burst + rate * (t - s)).
struct AffineEnvelope {
    double burst_bits = 0.0;
    double rate_bits_per_slot = 0.0;

    void validate() const
    {
        if (!(burst_bits >= 0.0)) throw DomainError("envelope: burst must be >= 0");
        if (!(rate_bits_per_slot >= 0.0)) throw DomainError("envelope: rate must be >= 0");
    }

    // ln p_a(theta) = theta * rho_a.
    double log_rate_factor(double theta) const noexcept { return theta * rate_bits_per_slot; }

    bool operator==(const AffineEnvelope&) const = default;
};

inline double arrival_log_mgf_bound(const AffineEnvelope& env, double theta, std::size_t interval_slots)
{
    if (!(theta > 0.0)) throw DomainError("arrival MGF bound: theta must be positive");
    return theta * env.burst_bits + static_cast<double>(interval_slots) * theta * env.rate_bits_per_slot;
}

// Constant-rate trace a_i = rho_a. The burst allowance is never used, so the
// trace conforms to the envelope for any burst >= 0.
inline std::vector<double> generate_arrivals(const AffineEnvelope& env, std::size_t horizon_slots)
{
    env.validate();
    return std::vector<double>(horizon_slots, env.rate_bits_per_slot);
}

} // namespace mmwnc

#endif
