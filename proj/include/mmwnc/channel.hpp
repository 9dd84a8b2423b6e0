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

#ifndef MMWNC_CHANNEL_HPP
#define MMWNC_CHANNEL_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "errors.hpp"

namespace mmwnc {

// ln(10)/10: converts a dB quantity to natural-log scale.
inline constexpr double kDbToNeper = std::numbers::ln10 / 10.0;

// CDF values are kept away from exact 0 and 1 so downstream logs stay finite.
inline constexpr double kCdfFloor = 1e-300;
inline constexpr double kCdfCeil = 1.0 - 1e-16;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

struct LinkBudget {
    double transmit_power_dbm = 0.0;
    double antenna_gain_tx_db = 0.0;
    double antenna_gain_rx_db = 0.0;
    double noise_density_dbm_per_mhz = -114.0;
    double bandwidth_hz = 500e6;
    double distance_m = 1.0;
    double intercept_alpha_db = 0.0;
    double slope_beta = 2.0;

    void validate() const
    {
        if (!(bandwidth_hz > 0.0)) throw DomainError("link budget: bandwidth must be positive");
        if (!(distance_m > 0.0)) throw DomainError("link budget: distance must be positive");
        if (!(slope_beta > 0.0)) throw DomainError("link budget: path-loss slope must be positive");
    }

    bool operator==(const LinkBudget&) const = default;
};

// Path loss alpha + 10 beta log10(l) in dB.
inline double path_loss_db(const LinkBudget& b)
{
    return b.intercept_alpha_db + 10.0 * b.slope_beta * std::log10(b.distance_m);
}

// Total noise power over the band, dBm.
inline double noise_power_dbm(const LinkBudget& b)
{
    return b.noise_density_dbm_per_mhz + 10.0 * std::log10(b.bandwidth_hz / 1e6);
}

// Deterministic system gain kappa (dB): the median SNR of the shadowed link.
inline double compute_kappa(const LinkBudget& b)
{
    b.validate();
    return b.transmit_power_dbm + b.antenna_gain_tx_db + b.antenna_gain_rx_db - path_loss_db(b) -
           noise_power_dbm(b);
}

// Per-slot SNR gamma = kappa * 10^(-xi/10), xi ~ N(0, sigma^2), i.i.d. over slots.
struct ShadowingChannel {
    double kappa_db = 25.0;
    double sigma_db = 8.0;
    double bandwidth_hz = 500e6;
    double slot_seconds = 1.0;

    void validate() const
    {
        if (!std::isfinite(kappa_db)) throw DomainError("channel: kappa_db must be finite");
        if (!(sigma_db >= 0.0) || !std::isfinite(sigma_db)) throw DomainError("channel: sigma_db must be >= 0");
        if (!(bandwidth_hz > 0.0)) throw DomainError("channel: bandwidth must be positive");
        if (!(slot_seconds > 0.0)) throw DomainError("channel: slot length must be positive");
    }

    bool deterministic() const noexcept { return sigma_db == 0.0; }
    double median_snr() const { return db_to_linear(kappa_db); }

    // Mean and standard deviation of ln(gamma).
    double log_mean() const noexcept { return kDbToNeper * kappa_db; }
    double log_stddev() const noexcept { return kDbToNeper * sigma_db; }

    // eta * slot: bits carried per nat of ln(1+gamma) in one slot (eta = W / ln 2).
    double bits_per_nat() const noexcept { return bandwidth_hz / std::numbers::ln2 * slot_seconds; }

    bool operator==(const ShadowingChannel&) const = default;
};

namespace detail {

inline double clamp_probability(double p) { return std::clamp(p, kCdfFloor, kCdfCeil); }

inline void require_positive_snr(double x)
{
    if (!(x > 0.0)) throw DomainError("SNR argument must be positive");
}

} // namespace detail

// F_gamma(x) = 1/2 erfc(-(ln x - iota kappa_dB) / (sqrt(2) iota sigma)).
inline double snr_cdf(const ShadowingChannel& ch, double x)
{
    detail::require_positive_snr(x);
    if (ch.deterministic()) return x >= ch.median_snr() ? 1.0 : 0.0;
    const double u = (std::log(x) - ch.log_mean()) / (std::numbers::sqrt2 * ch.log_stddev());
    return detail::clamp_probability(0.5 * std::erfc(-u));
}

// 1 - F_gamma(x), evaluated directly so the upper tail keeps full relative precision.
inline double snr_survival(const ShadowingChannel& ch, double x)
{
    detail::require_positive_snr(x);
    if (ch.deterministic()) return x >= ch.median_snr() ? 0.0 : 1.0;
    const double u = (std::log(x) - ch.log_mean()) / (std::numbers::sqrt2 * ch.log_stddev());
    return detail::clamp_probability(0.5 * std::erfc(u));
}

// Draws SNR samples for one channel. Keeps its normal distribution between
// calls, so a sampler bound to one engine yields a reproducible stream.
class SnrSampler {
  public:
    explicit SnrSampler(const ShadowingChannel& ch)
        : median_(ch.median_snr()), shadowing_(0.0, ch.sigma_db > 0.0 ? ch.sigma_db : 1.0),
          deterministic_(ch.deterministic())
    {
        ch.validate();
    }

    template <std::uniform_random_bit_generator G>
    double operator()(G& gen)
    {
        if (deterministic_) return median_;
        return median_ * std::pow(10.0, -shadowing_(gen) / 10.0);
    }

  private:
    double median_;
    std::normal_distribution<double> shadowing_;
    bool deterministic_;
};

template <std::uniform_random_bit_generator G>
double sample_snr(const ShadowingChannel& ch, G& gen)
{
    return SnrSampler{ch}(gen);
}

// Bits served in one slot at SNR gamma: slot * (W / ln 2) * ln(1 + gamma).
inline double capacity_bits_per_slot(const ShadowingChannel& ch, double gamma)
{
    if (!(gamma >= 0.0)) throw DomainError("capacity: SNR must be non-negative");
    return ch.bits_per_nat() * std::log1p(gamma);
}

} // namespace mmwnc

#endif
