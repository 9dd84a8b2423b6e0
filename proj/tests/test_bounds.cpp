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

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include <mmwnc/bounds.hpp>
#include <mmwnc/simulator.hpp>

using namespace mmwnc;
using Catch::Approx;

namespace {

const ShadowingChannel kLink{25.0, 8.0};

AffineEnvelope gbps(double rate, double burst = 0.0) { return AffineEnvelope{burst, rate * 1e9}; }

// e^{theta b} sum_{u=0}^{min(s,t)} p^{t-u} q^{s-u}, summed term by term.
double direct_kernel(const AffineEnvelope& env, const ServiceCharacterization& svc, double theta, std::uint64_t s,
                     std::uint64_t t)
{
    const double lp = env.log_rate_factor(theta);
    const double lq = svc.log_q(theta);
    double sum = 0.0;
    for (std::uint64_t u = 0; u <= std::min(s, t); ++u)
        sum += std::exp(theta * env.burst_bits + double(t - u) * lp + double(s - u) * lq);
    return sum;
}

std::vector<double> interior_grid(const StabilityInterval& iv, std::size_t n)
{
    std::vector<double> g;
    const double a = std::log(iv.lower), b = std::log(iv.upper);
    for (std::size_t i = 1; i <= n; ++i) g.push_back(std::exp(a + (b - a) * double(i) / double(n + 1)));
    return g;
}

} // namespace

TEST_CASE("closed-form kernel dominates the finite sum and is its limit")
{
    const auto env = gbps(1.0, 2e7);
    const ServiceCharacterization svc(kLink);
    const auto iv = stability_region(env, svc);
    REQUIRE(!iv.empty());
    for (double theta : interior_grid(iv, 6)) {
        for (std::uint64_t s = 0; s <= 12; s += 3) {
            for (std::uint64_t t = 0; t <= 12; t += 4) {
                CHECK(kernel_bound(env, svc, theta, s, t) >= direct_kernel(env, svc, theta, s, t) * (1 - 1e-12));
            }
        }
    }
    // With the load at most 0.5 the geometric tail past u = 200 is below 1e-60.
    const double theta = 0.5 * iv.upper;
    REQUIRE(std::exp(detail::log_load(env, svc, theta)) < 0.5);
    CHECK(kernel_bound(env, svc, theta, 203, 200) == Approx(direct_kernel(env, svc, theta, 203, 200)).epsilon(1e-12));
    CHECK(kernel_bound(env, svc, theta, 200, 205) == Approx(direct_kernel(env, svc, theta, 200, 205)).epsilon(1e-12));
}

TEST_CASE("kernel outside the stable set is rejected")
{
    const auto env = gbps(1.0);
    const ServiceCharacterization svc(kLink);
    const auto iv = stability_region(env, svc);
    CHECK_THROWS_AS(log_kernel_bound(env, svc, iv.upper * 1.5, 0, 0), UnstableError);
    CHECK_THROWS_AS(log_kernel_bound(env, svc, 0.0, 0, 0), DomainError);
}

TEST_CASE("stability interval brackets the sign change of ln(p q)")
{
    for (double rate : {0.5, 1.0, 2.0, 3.0}) {
        const auto env = gbps(rate);
        const ServiceCharacterization svc(kLink);
        const auto iv = stability_region(env, svc);
        REQUIRE(!iv.empty());
        for (double theta : interior_grid(iv, 20)) CHECK(detail::log_load(env, svc, theta) < 0.0);
        CHECK(detail::log_load(env, svc, iv.upper * (1 + 1e-4)) >= 0.0);
    }
}

TEST_CASE("overloaded unshadowed link is unstable")
{
    const ShadowingChannel flat{25.0, 0.0};
    const double capacity = capacity_bits_per_slot(flat, flat.median_snr());
    const ServiceCharacterization svc(flat);
    const AffineEnvelope over{0.0, capacity * 1.01};
    CHECK(stability_region(over, svc).empty());
    CHECK_THROWS_AS(backlog_bound(over, svc, {1e-3, BoundKind::backlog}), UnstableError);
    CHECK_THROWS_AS(delay_bound(over, svc, {1e-3, BoundKind::delay}), UnstableError);

    const AffineEnvelope under{0.0, capacity * 0.99};
    CHECK(!stability_region(under, svc).empty());
    // Deterministic service above the arrival rate: the queue never builds up.
    CHECK(backlog_bound(under, svc, {1e-6, BoundKind::backlog}).value == 0.0);
}

TEST_CASE("zero arrival rate gives the burst as backlog bound")
{
    const ServiceCharacterization svc(kLink);
    for (double eps : {1e-1, 1e-3, 1e-6}) {
        const auto r = backlog_bound(gbps(0.0), svc, {eps, BoundKind::backlog});
        CHECK(r.value == 0.0);
        CHECK(std::isinf(r.stability_interval.upper));
        CHECK(backlog_bound(gbps(0.0, 5e6), svc, {eps, BoundKind::backlog}).value == 5e6);
    }
}

TEST_CASE("bounds grow as the violation probability shrinks")
{
    const ServiceCharacterization svc(kLink);
    for (double rate : {1.0, 2.0}) {
        double prev_b = -1.0, prev_w = -1.0;
        for (double eps : {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
            const double b = backlog_bound(gbps(rate), svc, {eps, BoundKind::backlog}).value;
            const double w = delay_bound(gbps(rate), svc, {eps, BoundKind::delay}).value;
            CHECK(b > prev_b);
            CHECK(w >= prev_w);
            prev_b = b;
            prev_w = w;
        }
    }
}

TEST_CASE("optimum is no worse than any traced grid point or a brute-force scan")
{
    const ServiceCharacterization svc(kLink);
    const auto env = gbps(2.0);
    const BoundQuery q{1e-3, BoundKind::backlog};
    const auto r = backlog_bound(env, svc, q);
    REQUIRE(r.diagnostics.size() == 200);
    for (const auto& p : r.diagnostics) CHECK(r.value <= p.objective * (1 + 1e-12));
    CHECK(r.stability_interval.contains(r.optimal_theta));

    double brute = std::numeric_limits<double>::infinity();
    for (double theta : interior_grid(r.stability_interval, 1500)) {
        const double lpq = detail::log_load(env, svc, theta);
        brute = std::min(brute, -(std::log(-std::expm1(lpq)) + std::log(q.epsilon)) / theta);
    }
    CHECK(r.value <= brute * (1 + 1e-9));
    CHECK(r.value >= brute * (1 - 1e-4));
}

TEST_CASE("delay bound is the smallest integer meeting the target")
{
    const ServiceCharacterization svc(ShadowingChannel{10.0, 8.0});
    const auto env = gbps(0.5);
    for (double eps : {1e-2, 1e-4}) {
        const auto r = delay_bound(env, svc, {eps, BoundKind::delay});
        const auto w = static_cast<std::uint64_t>(r.value);
        CHECK(r.kernel_at_optimum <= eps);

        auto brute_min = [&](std::uint64_t ww) {
            double m = std::numeric_limits<double>::infinity();
            for (double theta : interior_grid(r.stability_interval, 600))
                m = std::min(m, log_kernel_bound(env, svc, theta, ww, 0));
            return m;
        };
        std::uint64_t brute_w = 0;
        while (brute_min(brute_w) > std::log(eps)) ++brute_w;
        CHECK(w <= brute_w);
        CHECK(w + 1 >= brute_w);
        if (w > 0) CHECK(brute_min(w - 1) > std::log(eps));
    }
}

TEST_CASE("limit mode gives tighter bounds than the coarse lattice")
{
    const ServiceCharacterization coarse(kLink, DiscretizationConfig{});
    const ServiceCharacterization fine(kLink, DiscretizationConfig{}, ServiceMode::limit);
    for (double rate : {1.0, 2.0, 3.0}) {
        for (double eps : {1e-2, 1e-5}) {
            CHECK(backlog_bound(gbps(rate), coarse, {eps, BoundKind::backlog}).value >=
                  backlog_bound(gbps(rate), fine, {eps, BoundKind::backlog}).value);
        }
    }
}

TEST_CASE("regression values at one gigabit per second")
{
    // Frozen after the simulation-dominance checks passed.
    const BoundQuery q{1e-5, BoundKind::backlog};
    CHECK(backlog_bound(gbps(1.0), ServiceCharacterization(kLink), q).value == Approx(1369873196.5).epsilon(1e-6));
    CHECK(backlog_bound(gbps(1.0), ServiceCharacterization(kLink, {}, ServiceMode::limit), q).value ==
          Approx(1365074633.4).epsilon(1e-6));
    CHECK(delay_bound(gbps(1.0), ServiceCharacterization(kLink), {1e-5, BoundKind::delay}).value == 2.0);
}

TEST_CASE("backlog bound holds against simulation")
{
    const ServiceCharacterization svc(kLink);
    const auto env = gbps(2.0);
    SimConfig cfg;
    cfg.replications = 20'000;
    cfg.horizon_slots = 200;
    cfg.master_seed = 5;
    const auto sim = run_experiment(env, kLink, cfg);
    for (double eps : {1e-1, 1e-2}) {
        const double b = backlog_bound(env, svc, {eps, BoundKind::backlog}).value;
        const double w = delay_bound(env, svc, {eps, BoundKind::delay}).value;
        CHECK(sim.backlog_exceedance(b).probability <= eps + 3.0 * binomial_se(eps, cfg.replications));
        CHECK(sim.delay_exceedance(w).probability <= eps + 3.0 * binomial_se(eps, cfg.replications));
    }
}

TEST_CASE("query validation")
{
    const ServiceCharacterization svc(kLink);
    CHECK_THROWS_AS(backlog_bound(gbps(1.0), svc, {0.0, BoundKind::backlog}), DomainError);
    CHECK_THROWS_AS(backlog_bound(gbps(1.0), svc, {1.0, BoundKind::backlog}), DomainError);
    CHECK_THROWS_AS(backlog_bound(gbps(1.0), svc, {0.1, BoundKind::delay}), DomainError);
    CHECK(std::string(to_string(BoundKind::delay)) == "delay");
}
