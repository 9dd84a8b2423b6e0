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

#ifndef MMWNC_INVERSE_MOMENT_HPP
#define MMWNC_INVERSE_MOMENT_HPP

// Upper bounds on E[(1+X)^-theta] for a non-negative X known through its CDF.
//
// The bound is the upper Riemann-Stieltjes sum of h(x) = (1+x)^-theta over a
// partition of [0, inf) drawn from the lattice {k * delta}:
//
//   V = sum_i h(x_{i-1}) (F(x_i) - F(x_{i-1})) + h(x_N) (1 - F(x_N)),
//
// which, after summation by parts, is exactly
//
//   (1 + N delta)^-theta + sum_{k=1..N} a(k) F(k delta),
//   a(k) = (1 + (k-1) delta)^-theta - (1 + k delta)^-theta,
//
// whenever the partition is the full uniform lattice up to N delta. Because h
// is decreasing, V >= E[h(X)] for every partition, and refining a partition
// never increases V.
//
// Partition layout: every lattice point up to X0 = H0 * delta (H0 the smallest
// power of two with H0 * delta >= uniform_span), then in the octave
// (X0 2^j, X0 2^(j+1)] every 2^(j+1)-th lattice point. Halving delta doubles
// H0 and leaves X0 fixed, so the finer partition contains every point of the
// coarser one. Truncation (closing the partition with a final cell [x, inf))
// is decided only at power-of-two lattice indices, whose positions are also
// invariant under halving delta.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "channel.hpp"
#include "errors.hpp"

namespace mmwnc {

struct DiscretizationConfig {
    double step_delta = 1e-2;
    // Residual looseness allowed when closing the partition: truncate at x once
    // (1+x)^-theta (1 - F(x)) < tail_mass_tol.
    double tail_mass_tol = 1e-12;
    // Hard cap on the number of partition cells.
    std::size_t max_terms = 10'000'000;
    // Halve delta until the bound stops moving (relative change < refine_rel_tol).
    bool refine_to_limit = false;
    // Length of the uniform-step head of the partition, in linear SNR units.
    double uniform_span = 100.0;
    // Refinement stops once a halving moves the bound by less than this
    // (relative). Convergence is first order, so the last move also estimates
    // the remaining gap to the limit.
    double refine_rel_tol = 2e-5;
    // Uniform head used while refining; error per cell scales with its width
    // relative to 1 + x, so a long uniform head only adds cells.
    double refine_span = 1.0;
    double min_step = 1e-8;

    void validate() const
    {
        if (!(step_delta > 0.0) || !std::isfinite(step_delta))
            throw DomainError("discretization: step_delta must be positive");
        if (!(tail_mass_tol > 0.0 && tail_mass_tol < 1.0))
            throw DomainError("discretization: tail_mass_tol must lie in (0, 1)");
        if (max_terms < 1) throw DomainError("discretization: max_terms must be >= 1");
        if (!(uniform_span > 0.0) || !std::isfinite(uniform_span))
            throw DomainError("discretization: uniform_span must be positive");
        if (!(refine_rel_tol > 0.0)) throw DomainError("discretization: refine_rel_tol must be positive");
        if (!(refine_span > 0.0) || !std::isfinite(refine_span))
            throw DomainError("discretization: refine_span must be positive");
        if (!(min_step > 0.0)) throw DomainError("discretization: min_step must be positive");
    }

    bool operator==(const DiscretizationConfig&) const = default;
};

// A value in (0, 1] together with an accurate natural log, which stays exact
// when the value is within rounding of 1 or far below double range.
struct InverseMoment {
    double value = 1.0;
    double log_value = 0.0;
    std::size_t cells = 0;         // partition cells used (0 for quadrature)
    double truncation_point = 0.0; // left end of the closing cell [x, inf)
    double step = 0.0;             // delta used; the last one in refine mode
};

namespace detail {

// Neumaier-compensated running sum.
class CompensatedSum {
  public:
    void add(double v) noexcept
    {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) comp_ += (sum_ - t) + v;
        else comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Sum of term(i) over [begin, end): plain sums within short blocks, blocks
// combined with compensation. Terms here are non-negative, so the in-block
// error stays at a few ulps of the block sum.
template <class Term>
void add_blocked(CompensatedSum& acc, std::size_t begin, std::size_t end, Term&& term)
{
    constexpr std::size_t block = 256;
    while (begin < end) {
        const std::size_t stop = std::min(end, begin + block);
        double s = 0.0;
        for (std::size_t i = begin; i < stop; ++i) s += term(i);
        acc.add(s);
        begin = stop;
    }
}

struct LatticeCell {
    double left_log1p; // ln(1 + x_{i-1})
    double mass;       // P(x_{i-1} < X <= x_i); the first cell also holds P(X = 0)
};

struct LatticeCheckpoint {
    std::size_t cells; // cells preceding this point
    double x;
    double log1p_x;
    double survival;   // 1 - F(x)
    bool final;        // the walk ends here regardless of theta
};

inline std::uint64_t uniform_head_cells(double delta, double span)
{
    std::uint64_t head = 2;
    while (static_cast<double>(head) * delta < span) {
        if (head >= (std::uint64_t{1} << 52)) throw DomainError("discretization: uniform_span / step_delta too large");
        head <<= 1;
    }
    return head;
}

constexpr bool is_power_of_two(std::uint64_t k) noexcept { return k != 0 && (k & (k - 1)) == 0; }

// Walks the partition in increasing x. `on_cell(LatticeCell)` receives every
// cell; `on_checkpoint(LatticeCheckpoint) -> bool` is called at power-of-two
// lattice indices and at forced stops, and ends the walk by returning true
// (it must return true when `final` is set).
template <class Cdf, class Survival, class OnCell, class OnCheckpoint>
void walk_lattice(const Cdf& cdf, const Survival& survival, double delta, double span, std::size_t max_cells,
                  double survival_stop, OnCell&& on_cell, OnCheckpoint&& on_checkpoint)
{
    constexpr std::uint64_t k_limit = std::uint64_t{1} << 62;
    constexpr double monotone_slack = 1e-14;

    const std::uint64_t head = uniform_head_cells(delta, span);
    double prev_x = 0.0;
    double prev_f = 0.0;
    double prev_s = 1.0;
    std::size_t cells = 0;

    std::uint64_t k = 0;
    std::uint64_t step = 1;
    std::uint64_t octave_end = head;
    for (;;) {
        if (k >= octave_end) {
            octave_end <<= 1;
            step <<= 1;
        }
        k += step;
        const double x = static_cast<double>(k) * delta;
        const double f = cdf(x);
        const double s = survival(x);
        if (!(f >= 0.0 && f <= 1.0) || !(s >= 0.0 && s <= 1.0))
            throw ContractError("CDF value outside [0, 1] at x = " + std::to_string(x));
        if (f < prev_f - monotone_slack || s > prev_s + monotone_slack)
            throw ContractError("CDF is not monotone non-decreasing near x = " + std::to_string(x));

        double mass = (cells == 0) ? f : (f <= 0.5 ? f - prev_f : prev_s - s);
        mass = std::max(mass, 0.0);
        on_cell(LatticeCell{std::log1p(prev_x), mass});
        ++cells;
        prev_x = x;
        prev_f = std::max(f, prev_f);
        prev_s = std::min(s, prev_s);

        const bool capped = cells >= max_cells || k >= k_limit;
        const bool checkpoint = is_power_of_two(k);
        if (checkpoint || capped) {
            const bool final = capped || (checkpoint && prev_s < survival_stop);
            if (on_checkpoint(LatticeCheckpoint{cells, x, std::log1p(x), prev_s, final}) || final) return;
        }
    }
}

// h(x) = (1+x)^-e and 1 - h(x) from ln(1+x).
inline double decay(double exponent, double log1p_x) { return std::exp(-exponent * log1p_x); }
inline double decay_complement(double exponent, double log1p_x) { return -std::expm1(-exponent * log1p_x); }

inline InverseMoment finish_moment(double value, double complement, bool have_complement)
{
    InverseMoment r;
    value = std::min(value, 1.0);
    r.value = value;
    if (have_complement && complement < 0.5) r.log_value = std::log1p(-std::max(complement, 0.0));
    else r.log_value = std::log(value);
    return r;
}

} // namespace detail

// Theta-independent part of the bound for one (distribution, delta) pair:
// cell masses and left endpoints, walked until the tail mass drops below the
// tolerance. Evaluating it for a given exponent is a single pass.
class LatticeTable {
  public:
    LatticeTable() = default;

    template <class Cdf, class Survival>
    LatticeTable(const Cdf& cdf, const Survival& survival, const DiscretizationConfig& cfg) : step_(cfg.step_delta)
    {
        cfg.validate();
        detail::walk_lattice(
            cdf, survival, cfg.step_delta, cfg.uniform_span, cfg.max_terms, cfg.tail_mass_tol,
            [this](const detail::LatticeCell& c) {
                logs_.push_back(c.left_log1p);
                masses_.push_back(c.mass);
            },
            [this](const detail::LatticeCheckpoint& cp) {
                checkpoints_.push_back(cp);
                return false;
            });
    }

    std::size_t size() const noexcept { return masses_.size(); }
    double step() const noexcept { return step_; }

    InverseMoment evaluate(double exponent, double tail_mass_tol) const
    {
        if (!(exponent >= 0.0)) throw DomainError("inverse moment: exponent must be >= 0");
        if (exponent == 0.0) return unit_result();

        detail::CompensatedSum value;
        std::size_t begin = 0;
        const detail::LatticeCheckpoint* stop = nullptr;
        const double* logs = logs_.data();
        const double* masses = masses_.data();
        for (const auto& cp : checkpoints_) {
            detail::add_blocked(value, begin, cp.cells,
                                [&](std::size_t i) { return detail::decay(exponent, logs[i]) * masses[i]; });
            begin = cp.cells;
            if (cp.final || detail::decay(exponent, cp.log1p_x) * cp.survival < tail_mass_tol) {
                stop = &cp;
                break;
            }
        }
        value.add(detail::decay(exponent, stop->log1p_x) * stop->survival);

        InverseMoment r;
        const double v = value.value();
        if (v > 0.5) {
            detail::CompensatedSum comp;
            detail::add_blocked(comp, 0, stop->cells,
                                [&](std::size_t i) { return detail::decay_complement(exponent, logs[i]) * masses[i]; });
            comp.add(detail::decay_complement(exponent, stop->log1p_x) * stop->survival);
            r = detail::finish_moment(v, comp.value(), true);
        } else if (v < 1e-250) {
            r = detail::finish_moment(v, 0.0, false);
            r.log_value = log_sum(exponent, *stop);
        } else {
            r = detail::finish_moment(v, 0.0, false);
        }
        r.cells = stop->cells + 1;
        r.truncation_point = stop->x;
        r.step = step_;
        return r;
    }

  private:
    InverseMoment unit_result() const
    {
        InverseMoment r;
        r.step = step_;
        return r;
    }

    double log_sum(double exponent, const detail::LatticeCheckpoint& stop) const
    {
        double peak = -std::numeric_limits<double>::infinity();
        auto term = [&](double log1p_x, double mass) {
            return mass > 0.0 ? std::log(mass) - exponent * log1p_x : -std::numeric_limits<double>::infinity();
        };
        for (std::size_t i = 0; i < stop.cells; ++i) peak = std::max(peak, term(logs_[i], masses_[i]));
        peak = std::max(peak, term(stop.log1p_x, stop.survival));
        if (!std::isfinite(peak)) return -std::numeric_limits<double>::infinity();
        detail::CompensatedSum s;
        for (std::size_t i = 0; i < stop.cells; ++i) s.add(std::exp(term(logs_[i], masses_[i]) - peak));
        s.add(std::exp(term(stop.log1p_x, stop.survival) - peak));
        return peak + std::log(s.value());
    }

    std::vector<double> logs_;   // ln(1 + left end) per cell
    std::vector<double> masses_; // probability per cell
    std::vector<detail::LatticeCheckpoint> checkpoints_;
    double step_ = 0.0;
};

namespace detail {

// Single-delta bound streamed without storing the partition; truncation uses
// the exponent, so large exponents stop early.
template <class Cdf, class Survival>
InverseMoment lemma1_single(const Cdf& cdf, const Survival& survival, double exponent, double delta,
                            const DiscretizationConfig& cfg)
{
    CompensatedSum value;
    CompensatedSum comp;
    std::vector<LatticeCell> kept; // only filled when a log-domain pass is needed
    LatticeCheckpoint stop{};
    walk_lattice(
        cdf, survival, delta, cfg.uniform_span, cfg.max_terms, cfg.tail_mass_tol,
        [&](const LatticeCell& c) {
            value.add(decay(exponent, c.left_log1p) * c.mass);
            comp.add(decay_complement(exponent, c.left_log1p) * c.mass);
        },
        [&](const LatticeCheckpoint& cp) {
            if (cp.final || decay(exponent, cp.log1p_x) * cp.survival < cfg.tail_mass_tol) {
                stop = cp;
                return true;
            }
            return false;
        });
    value.add(decay(exponent, stop.log1p_x) * stop.survival);
    comp.add(decay_complement(exponent, stop.log1p_x) * stop.survival);

    InverseMoment r = finish_moment(value.value(), comp.value(), true);
    if (r.value < 1e-250) {
        // Rebuild once in log space; rare (very large exponents only).
        DiscretizationConfig tight = cfg;
        tight.step_delta = delta;
        tight.max_terms = stop.cells;
        LatticeTable table(cdf, survival, tight);
        const InverseMoment exact_log = table.evaluate(exponent, cfg.tail_mass_tol);
        r.log_value = exact_log.log_value;
    }
    r.cells = stop.cells + 1;
    r.truncation_point = stop.x;
    r.step = delta;
    return r;
}

} // namespace detail

// Bound on E[(1+X)^-theta] from the CDF (and survival function) of X >= 0.
template <class Cdf, class Survival>
InverseMoment lemma1_bound(const Cdf& cdf, const Survival& survival, double theta, const DiscretizationConfig& cfg)
{
    cfg.validate();
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError("inverse moment bound: theta must be >= 0");
    if (theta == 0.0) {
        InverseMoment r;
        r.step = cfg.step_delta;
        return r;
    }
    if (!cfg.refine_to_limit) return detail::lemma1_single(cdf, survival, theta, cfg.step_delta, cfg);

    DiscretizationConfig rc = cfg;
    rc.uniform_span = cfg.refine_span;
    auto pass = [&](double delta) {
        InverseMoment r = detail::lemma1_single(cdf, survival, theta, delta, rc);
        // A capped walk truncates early, so the sequence would stop refining.
        if (r.cells > rc.max_terms)
            throw NumericalError("inverse moment bound: cell cap " + std::to_string(rc.max_terms) +
                                 " reached while refining at step " + std::to_string(delta));
        return r;
    };
    double delta = cfg.step_delta;
    InverseMoment prev = pass(delta);
    for (;;) {
        delta *= 0.5;
        if (delta < cfg.min_step)
            throw NumericalError("inverse moment bound: no convergence before step " + std::to_string(cfg.min_step) +
                                 " (last value " + std::to_string(prev.value) + ")");
        InverseMoment cur = pass(delta);
        if (prev.value - cur.value <= cfg.refine_rel_tol * cur.value) return cur;
        prev = cur;
    }
}

template <class Cdf>
InverseMoment lemma1_bound(const Cdf& cdf, double theta, const DiscretizationConfig& cfg)
{
    return lemma1_bound(cdf, [&cdf](double x) { return 1.0 - cdf(x); }, theta, cfg);
}

// SNR of a shadowing channel. The deterministic (sigma = 0) channel goes through
// the same partition with its step CDF.
inline InverseMoment lemma1_bound(const ShadowingChannel& ch, double theta, const DiscretizationConfig& cfg)
{
    ch.validate();
    return lemma1_bound([&ch](double x) { return snr_cdf(ch, x); }, [&ch](double x) { return snr_survival(ch, x); },
                        theta, cfg);
}

// ---------------------------------------------------------------------------
// Quadrature reference for E[(1+X)^-theta].

// ln X ~ N(log_mean, log_stddev^2).
struct LogNormalLaw {
    double log_mean = 0.0;
    double log_stddev = 1.0;
};

struct PointMassLaw {
    double at = 0.0;
};

// Density on [0, inf).
struct DensityLaw {
    std::function<double(double)> pdf;
};

// CDF on [0, inf); integrated by parts: E[h(X)] = 1 + int h'(x) (1 - F(x)) dx.
struct CdfLaw {
    std::function<double(double)> cdf;
};

using MomentLaw = std::variant<LogNormalLaw, PointMassLaw, DensityLaw, CdfLaw>;

inline MomentLaw snr_law(const ShadowingChannel& ch)
{
    ch.validate();
    if (ch.deterministic()) return PointMassLaw{ch.median_snr()};
    return LogNormalLaw{ch.log_mean(), ch.log_stddev()};
}

namespace detail {

// ln(1 + e^y) without overflow.
inline double softplus(double y)
{
    if (y > 35.0) return y + std::exp(-y);
    if (y < -35.0) return std::exp(y);
    return std::log1p(std::exp(y));
}

struct QuadratureResult {
    double value;
    double error;
};

template <class F>
QuadratureResult kronrod(F f, double a, double b, double rel_tol)
{
    double error = 0.0;
    double l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, rel_tol, &error, &l1);
    return {v, error};
}

template <class F>
QuadratureResult half_line(F f, double rel_tol)
{
    boost::math::quadrature::exp_sinh<double> integrator;
    double error = 0.0;
    double l1 = 0.0;
    const double v = integrator.integrate(f, rel_tol, &error, &l1);
    return {v, error};
}

inline void require_converged(const QuadratureResult& r, double rel_tol, const char* what)
{
    if (!std::isfinite(r.value) || r.error > 10.0 * rel_tol * std::abs(r.value) + 1e-300)
        throw NumericalError(std::string("inverse moment quadrature (") + what + ") did not converge: value " +
                             std::to_string(r.value) + ", error estimate " + std::to_string(r.error));
}

} // namespace detail

// E[(1+X)^-theta] by adaptive quadrature, relative tolerance rel_tol.
inline InverseMoment exact_inverse_moment(const MomentLaw& law, double theta, double rel_tol = 1e-10)
{
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw DomainError("inverse moment: theta must be >= 0");
    if (theta == 0.0) return InverseMoment{};

    InverseMoment r;
    if (const auto* pm = std::get_if<PointMassLaw>(&law)) {
        if (!(pm->at >= 0.0)) throw DomainError("inverse moment: point mass must be non-negative");
        r.log_value = -theta * std::log1p(pm->at);
        r.value = std::exp(r.log_value);
        return r;
    }

    if (const auto* ln = std::get_if<LogNormalLaw>(&law)) {
        if (!(ln->log_stddev > 0.0)) throw DomainError("inverse moment: log-normal spread must be positive");
        // x = exp(mu + s z), z standard normal; z < -38 carries no mass in double.
        const double mu = ln->log_mean;
        const double s = ln->log_stddev;
        const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
        auto phi = [norm](double z) { return norm * std::exp(-0.5 * z * z); };
        auto h = [&](double z) { return phi(z) * std::exp(-theta * detail::softplus(mu + s * z)); };
        auto hc = [&](double z) { return phi(z) * -std::expm1(-theta * detail::softplus(mu + s * z)); };

        auto body = detail::kronrod(h, -10.0, 10.0, rel_tol);
        detail::require_converged(body, rel_tol, "log-normal body");
        const auto lower = detail::kronrod(h, -38.0, -10.0, rel_tol);
        const double v = body.value + lower.value;
        if (v > 0.5) {
            auto cb = detail::kronrod(hc, -10.0, 10.0, rel_tol);
            detail::require_converged(cb, rel_tol, "log-normal complement");
            const auto cl = detail::kronrod(hc, -38.0, -10.0, rel_tol);
            const auto cu = detail::kronrod(hc, 10.0, 38.0, rel_tol);
            return detail::finish_moment(v, cb.value + cl.value + cu.value, true);
        }
        return detail::finish_moment(v, 0.0, false);
    }

    if (const auto* d = std::get_if<DensityLaw>(&law)) {
        auto h = [&](double x) { return d->pdf(x) * std::exp(-theta * std::log1p(x)); };
        const auto v = detail::half_line(h, rel_tol);
        detail::require_converged(v, rel_tol, "density");
        if (v.value > 0.5) {
            auto hc = [&](double x) { return d->pdf(x) * -std::expm1(-theta * std::log1p(x)); };
            const auto c = detail::half_line(hc, rel_tol);
            return detail::finish_moment(v.value, c.value, true);
        }
        return detail::finish_moment(v.value, 0.0, false);
    }

    const auto& c = std::get<CdfLaw>(law);
    // 1 - E[h(X)] = theta * int (1+x)^-(theta+1) (1 - F(x)) dx.
    auto g = [&](double x) { return theta * std::exp(-(theta + 1.0) * std::log1p(x)) * (1.0 - c.cdf(x)); };
    const auto comp = detail::half_line(g, rel_tol);
    detail::require_converged(comp, rel_tol, "cdf");
    return detail::finish_moment(1.0 - comp.value, comp.value, true);
}

inline InverseMoment exact_inverse_moment(const ShadowingChannel& ch, double theta, double rel_tol = 1e-10)
{
    return exact_inverse_moment(snr_law(ch), theta, rel_tol);
}

} // namespace mmwnc

#endif
