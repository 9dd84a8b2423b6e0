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

#ifndef MMWNC_BOUNDS_HPP
#define MMWNC_BOUNDS_HPP

// Backlog and delay bounds for an affine arrival envelope served by an i.i.d.
// shadowed link. With p = exp(theta rho_a) and q = q(theta), the kernel
//
//   M(theta, s, t) <= exp(theta b) p^max(t-s,0) q^max(s-t,0) / (1 - p q)
//
// gives P(B > x) <= exp(-theta x) M(theta, t, t) and P(W > w) <= M(theta, t+w, t),
// valid on the stability region p q < 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "arrival.hpp"
#include "errors.hpp"
#include "service_bound.hpp"

namespace mmwnc {

enum class BoundKind { backlog, delay };

inline const char* to_string(BoundKind k) { return k == BoundKind::backlog ? "backlog" : "delay"; }

struct BoundQuery {
    double epsilon = 1e-3;
    BoundKind kind = BoundKind::backlog;

    void validate() const
    {
        if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("bound query: epsilon must lie in (0, 1)");
    }
};

// Open-ended description of {theta : p_a(theta) q(theta) < 1} as located by the
// scan; both endpoints were verified stable.
struct StabilityInterval {
    double lower = 0.0;
    double upper = 0.0;

    bool empty() const noexcept { return !(upper >= lower && lower > 0.0); }
    bool contains(double theta) const noexcept { return !empty() && theta >= lower && theta <= upper; }
};

struct ObjectivePoint {
    double theta;
    double objective;
};

struct BoundResult {
    double value = 0.0;         // bits (backlog) or slots (delay)
    double optimal_theta = 0.0; // 1/bits
    double kernel_at_optimum = 0.0;
    StabilityInterval stability_interval;
    std::vector<ObjectivePoint> diagnostics; // objective on the theta grid
};

struct SearchSettings {
    // Scan range for the stability search, as exponents theta * eta * slot.
    double scan_lower = 1e-7;
    double scan_upper = 1e4;
    // The stable set is (0, theta*); the search grid starts at theta* times this.
    double lower_ratio = 1e-4;
    double bisect_rel_width = 1e-6;
    std::size_t grid_points = 200;
    double edge_margin = 1e-3;
    double golden_rel_tol = 1e-6;
    std::uint64_t max_delay_slots = std::uint64_t{1} << 40;
};

namespace detail {

// ln(p q) = theta rho_a + ln q(theta).
inline double log_load(const AffineEnvelope& env, const ServiceCharacterization& svc, double theta)
{
    return env.log_rate_factor(theta) + svc.log_q(theta);
}

// ln(1 - p q), or NaN outside the stability region.
inline double log_one_minus_load(double log_pq)
{
    if (!(log_pq < 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::log(-std::expm1(log_pq));
}

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n)
{
    std::vector<double> out(n);
    if (n == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

// Bisection in log(theta) between a stable and an unstable point; returns the
// stable end of the final bracket.
template <class IsStable>
double bisect_boundary(double stable, double unstable, double rel_width, IsStable&& is_stable)
{
    while (std::abs(std::log(unstable / stable)) > rel_width) {
        const double mid = std::sqrt(stable * unstable);
        if (is_stable(mid)) stable = mid;
        else unstable = mid;
    }
    return stable;
}

struct Minimum {
    double theta;
    double value;
};

// Grid over the shrunk stability interval, then golden-section in log(theta)
// around the best grid point. Non-finite objective values count as +inf.
template <class Objective>
Minimum minimize_over_theta(const StabilityInterval& iv, const SearchSettings& st, Objective&& f,
                            std::vector<ObjectivePoint>* trace)
{
    constexpr double inf = std::numeric_limits<double>::infinity();
    auto safe = [&](double th) {
        const double v = f(th);
        return std::isfinite(v) ? v : inf;
    };
    double lo = iv.lower * (1.0 + st.edge_margin);
    double hi = iv.upper * (1.0 - st.edge_margin);
    if (!(hi > lo)) lo = hi = std::sqrt(iv.lower * iv.upper);

    const auto grid = log_spaced(lo, hi, std::max<std::size_t>(st.grid_points, 1));
    std::vector<double> vals(grid.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        vals[i] = safe(grid[i]);
        if (vals[i] < vals[best]) best = i;
    }
    if (trace) {
        trace->clear();
        for (std::size_t i = 0; i < grid.size(); ++i) trace->push_back({grid[i], vals[i]});
    }
    Minimum m{grid[best], vals[best]};
    if (grid.size() < 3 || !std::isfinite(m.value)) return m;

    double a = std::log(grid[best == 0 ? 0 : best - 1]);
    double b = std::log(grid[std::min(best + 1, grid.size() - 1)]);
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - ratio * (b - a);
    double d = a + ratio * (b - a);
    double fc = safe(std::exp(c));
    double fd = safe(std::exp(d));
    while (b - a > st.golden_rel_tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = safe(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = safe(std::exp(d));
        }
    }
    if (fc < m.value) m = {std::exp(c), fc};
    if (fd < m.value) m = {std::exp(d), fd};
    return m;
}

} // namespace detail

// ln M(theta, s, t) for the closed-form kernel; throws outside the stability region.
inline double log_kernel_bound(const AffineEnvelope& env, const ServiceCharacterization& svc, double theta,
                               std::uint64_t s, std::uint64_t t)
{
    if (!(theta > 0.0)) throw DomainError("kernel: theta must be positive");
    const double log_q = svc.log_q(theta);
    const double log_p = env.log_rate_factor(theta);
    const double log_pq = log_p + log_q;
    if (!(log_pq < 0.0))
        throw UnstableError("kernel: p_a(theta) q(theta) >= 1 at theta = " + std::to_string(theta));
    const double ahead = t > s ? static_cast<double>(t - s) : 0.0;
    const double behind = s > t ? static_cast<double>(s - t) : 0.0;
    return theta * env.burst_bits + ahead * log_p + behind * log_q - detail::log_one_minus_load(log_pq);
}

inline double kernel_bound(const AffineEnvelope& env, const ServiceCharacterization& svc, double theta,
                           std::uint64_t s, std::uint64_t t)
{
    return std::exp(log_kernel_bound(env, svc, theta, s, t));
}

// ln(p q) is convex in theta and vanishes at 0, so the stable set is an
// interval (0, theta*). Step down by decades from scan_upper to the first
// stable point, then bisect for theta*.
inline StabilityInterval stability_region(const AffineEnvelope& env, const ServiceCharacterization& svc,
                                          const SearchSettings& st = {})
{
    env.validate();
    auto stable = [&](double th) { return detail::log_load(env, svc, th) < 0.0; };
    const double per_exponent = 1.0 / svc.channel().bits_per_nat();
    const double top = st.scan_upper * per_exponent;
    const double floor = st.scan_lower * per_exponent;

    double th = top;
    while (th >= floor * (1.0 - 1e-12) && !stable(th)) th /= 10.0;
    if (th < floor * (1.0 - 1e-12)) return {};

    StabilityInterval iv;
    iv.upper = th == top ? top : detail::bisect_boundary(th, th * 10.0, st.bisect_rel_width, stable);
    iv.lower = iv.upper * st.lower_ratio;
    return iv;
}

namespace detail {

inline StabilityInterval require_stable(const AffineEnvelope& env, const ServiceCharacterization& svc,
                                        const SearchSettings& st)
{
    const StabilityInterval iv = stability_region(env, svc, st);
    if (iv.empty())
        throw UnstableError("no theta satisfies p_a(theta) q(theta) < 1 (arrival rate " +
                            std::to_string(env.rate_bits_per_slot) + " bits/slot)");
    return iv;
}

} // namespace detail

namespace detail {

// p q < 1 for every theta > 0: no arrivals, or service that never drops to
// the arrival rate.
inline bool stable_for_all_theta(const AffineEnvelope& env, const ServiceCharacterization& svc)
{
    if (env.rate_bits_per_slot == 0.0) return true;
    const auto& ch = svc.channel();
    return ch.deterministic() && env.rate_bits_per_slot < capacity_bits_per_slot(ch, ch.median_snr());
}

} // namespace detail

// b = inf_theta (ln M(theta, t, t) - ln eps) / theta
//   = inf_theta { burst - (ln(1 - p q) + ln eps) / theta }, clamped at 0.
inline BoundResult backlog_bound(const AffineEnvelope& env, const ServiceCharacterization& svc,
                                 const BoundQuery& query, const SearchSettings& st = {})
{
    query.validate();
    if (query.kind != BoundKind::backlog) throw DomainError("backlog_bound: query kind must be backlog");
    BoundResult r;
    r.stability_interval = detail::require_stable(env, svc, st);
    if (detail::stable_for_all_theta(env, svc)) {
        // The objective falls to the burst as theta grows.
        r.stability_interval.upper = std::numeric_limits<double>::infinity();
        r.value = env.burst_bits;
        r.optimal_theta = std::numeric_limits<double>::infinity();
        r.kernel_at_optimum = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    const double log_eps = std::log(query.epsilon);
    auto objective = [&](double th) {
        return env.burst_bits - (detail::log_one_minus_load(detail::log_load(env, svc, th)) + log_eps) / th;
    };
    const auto m = detail::minimize_over_theta(r.stability_interval, st, objective, &r.diagnostics);
    if (!std::isfinite(m.value)) throw NumericalError("backlog_bound: objective not finite on the stability interval");
    r.value = std::max(m.value, 0.0);
    r.optimal_theta = m.theta;
    r.kernel_at_optimum = kernel_bound(env, svc, m.theta, 0, 0);
    return r;
}

// Smallest integer w with inf_theta exp(theta b) q^w / (1 - p q) <= eps.
inline BoundResult delay_bound(const AffineEnvelope& env, const ServiceCharacterization& svc,
                               const BoundQuery& query, const SearchSettings& st = {})
{
    query.validate();
    if (query.kind != BoundKind::delay) throw DomainError("delay_bound: query kind must be delay");
    BoundResult r;
    r.stability_interval = detail::require_stable(env, svc, st);
    const double log_eps = std::log(query.epsilon);

    auto inner = [&](std::uint64_t w, std::vector<ObjectivePoint>* trace) {
        auto objective = [&](double th) {
            return log_kernel_bound(env, svc, th, static_cast<std::uint64_t>(w), 0);
        };
        auto guarded = [&](double th) {
            try {
                return objective(th);
            } catch (const UnstableError&) {
                return std::numeric_limits<double>::infinity();
            }
        };
        return detail::minimize_over_theta(r.stability_interval, st, guarded, trace);
    };

    std::uint64_t w = 0;
    if (inner(0, nullptr).value > log_eps) {
        std::uint64_t lo = 0;
        std::uint64_t hi = 1;
        while (inner(hi, nullptr).value > log_eps) {
            lo = hi;
            if (hi >= st.max_delay_slots) throw NumericalError("delay_bound: no delay bound below the search cap");
            hi *= 2;
        }
        while (hi - lo > 1) {
            const std::uint64_t mid = lo + (hi - lo) / 2;
            if (inner(mid, nullptr).value > log_eps) lo = mid;
            else hi = mid;
        }
        w = hi;
    }
    const auto m = inner(w, &r.diagnostics);
    r.value = static_cast<double>(w);
    r.optimal_theta = m.theta;
    r.kernel_at_optimum = std::exp(m.value);
    return r;
}

inline BoundResult compute_bound(const AffineEnvelope& env, const ServiceCharacterization& svc,
                                 const BoundQuery& query, const SearchSettings& st = {})
{
    return query.kind == BoundKind::backlog ? backlog_bound(env, svc, query, st) : delay_bound(env, svc, query, st);
}

} // namespace mmwnc

#endif
