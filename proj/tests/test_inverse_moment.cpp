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

#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include <mmwnc/channel.hpp>
#include <mmwnc/inverse_moment.hpp>
#include <mmwnc/random.hpp>

using namespace mmwnc;
using Catch::Approx;

namespace {

// The bound evaluated literally on the uniform grid k*delta, k = 0..n:
// (1 + n delta)^-theta + sum_k [(1+(k-1)delta)^-theta - (1+k delta)^-theta] F(k delta).
template <class Cdf>
long double literal_bound(const Cdf& cdf, double theta, double delta, std::uint64_t n)
{
    auto h = [&](std::uint64_t k) { return std::pow(1.0L + static_cast<long double>(k) * delta, -theta); };
    long double sum = h(n);
    long double prev = h(0);
    for (std::uint64_t k = 1; k <= n; ++k) {
        const long double cur = h(k);
        sum += (prev - cur) * cdf(static_cast<double>(k) * delta);
        prev = cur;
    }
    return sum;
}

double exp1_cdf(double x) { return -std::expm1(-x); }

DiscretizationConfig with_step(double delta)
{
    DiscretizationConfig c;
    c.step_delta = delta;
    return c;
}

} // namespace

TEST_CASE("matches the literal grid sum when truncation falls inside the uniform head")
{
    DiscretizationConfig cfg = with_step(0.01);
    const auto r = lemma1_bound(exp1_cdf, 1.0, cfg);
    REQUIRE(r.truncation_point <= cfg.uniform_span * 2.0);
    const auto n = static_cast<std::uint64_t>(std::llround(r.truncation_point / cfg.step_delta));
    CHECK(n == 4096);
    CHECK(r.value == Approx(static_cast<double>(literal_bound(exp1_cdf, 1.0, 0.01, n))).epsilon(1e-12));
}

TEST_CASE("coarsened tail sits between the literal sums at the head and at the truncation point")
{
    const ShadowingChannel ch{25.0, 2.0};
    auto cdf = [&](double x) { return snr_cdf(ch, x); };
    DiscretizationConfig cfg = with_step(0.01);
    cfg.uniform_span = 10.0;
    for (double theta : {0.5, 2.0}) {
        const auto r = lemma1_bound(ch, theta, cfg);
        const std::uint64_t head = 1024; // smallest power of two with head * delta >= span
        const auto n = static_cast<std::uint64_t>(std::llround(r.truncation_point / cfg.step_delta));
        REQUIRE(n > head);
        const double upper = static_cast<double>(literal_bound(cdf, theta, 0.01, head));
        const double lower = static_cast<double>(literal_bound(cdf, theta, 0.01, n));
        CHECK(r.value <= upper * (1 + 1e-12));
        CHECK(r.value >= lower * (1 - 1e-12));
    }
}

TEST_CASE("exponent zero and a point mass at zero give one")
{
    const ShadowingChannel ch{25.0, 8.0};
    CHECK(lemma1_bound(ch, 0.0, {}).value == 1.0);
    CHECK(lemma1_bound(ch, 0.0, {}).log_value == 0.0);
    auto at_zero = [](double) { return 1.0; };
    for (double theta : {0.1, 1.0, 50.0}) {
        const auto r = lemma1_bound(at_zero, theta, DiscretizationConfig{});
        CHECK(r.value == 1.0);
        CHECK(r.log_value == 0.0);
    }
    CHECK(exact_inverse_moment(PointMassLaw{0.0}, 3.0).value == 1.0);
}

TEST_CASE("quadrature reference against closed forms")
{
    auto pdf = [](double x) { return std::exp(-x); };
    // E[(1+X)^-1] = e E1(1) and E[(1+X)^-2] = 1 - e E1(1) for X ~ Exp(1).
    CHECK(exact_inverse_moment(DensityLaw{pdf}, 1.0).value == Approx(0.596347362323194074).epsilon(1e-10));
    CHECK(exact_inverse_moment(DensityLaw{pdf}, 2.0).value == Approx(0.403652637676805926).epsilon(1e-10));
    CHECK(exact_inverse_moment(CdfLaw{exp1_cdf}, 1.0).value == Approx(0.596347362323194074).epsilon(1e-10));
    CHECK(exact_inverse_moment(PointMassLaw{3.0}, 2.0).value == Approx(1.0 / 16.0).epsilon(1e-15));

    // Log-normal SNR at kappa = 25 dB, sigma = 8 dB (high-precision reference values).
    const ShadowingChannel ch{25.0, 8.0};
    const std::vector<std::pair<double, double>> ref{{0.5, 0.0832816410721850928},
                                                     {1.0, 0.0142305674274405525},
                                                     {2.0, 0.00173243643457834164},
                                                     {5.0, 0.000135502176858596343},
                                                     {10.0, 0.0000233203119141965226}};
    for (auto [theta, v] : ref) CHECK(exact_inverse_moment(ch, theta).value == Approx(v).epsilon(1e-9));
}

TEST_CASE("bound dominates the true moment and tightens as the step shrinks")
{
    const ShadowingChannel ch{25.0, 8.0};
    for (double theta : {0.5, 1.0, 2.0, 5.0, 10.0}) {
        const double exact = exact_inverse_moment(ch, theta).value;
        double prev = 2.0;
        for (double delta : {1.0, 0.1, 0.01, 0.001}) {
            const double v = lemma1_bound(ch, theta, with_step(delta)).value;
            CHECK(v >= exact);
            CHECK(v <= prev);
            prev = v;
        }
    }
    for (double theta : {1.0, 2.0}) {
        const double exact = exact_inverse_moment(CdfLaw{exp1_cdf}, theta).value;
        CHECK(lemma1_bound(exp1_cdf, theta, with_step(0.1)).value >= exact);
        CHECK(lemma1_bound(exp1_cdf, theta, with_step(0.001)).value == Approx(exact).epsilon(1e-3));
    }
}

TEST_CASE("refinement mode converges to the quadrature value")
{
    const ShadowingChannel ch{25.0, 8.0};
    DiscretizationConfig cfg;
    cfg.refine_to_limit = true;
    for (double theta : {0.5, 5.0}) {
        const auto r = lemma1_bound(ch, theta, cfg);
        const double exact = exact_inverse_moment(ch, theta).value;
        CHECK(r.value >= exact);
        CHECK((r.value - exact) / exact < 1e-4);
        CHECK(r.step < cfg.step_delta);
    }
}

TEST_CASE("later truncation never loosens the bound")
{
    const ShadowingChannel ch{25.0, 8.0};
    double prev = 2.0;
    for (std::size_t cap : {100u, 1000u, 10000u, 100000u, 1000000u}) {
        DiscretizationConfig cfg;
        cfg.max_terms = cap;
        const auto r = lemma1_bound(ch, 1.0, cfg);
        CHECK(r.cells <= cap + 1);
        CHECK(r.value <= prev);
        prev = r.value;
    }
    prev = 2.0;
    for (double tol : {1e-4, 1e-6, 1e-9, 1e-12}) {
        DiscretizationConfig cfg;
        cfg.tail_mass_tol = tol;
        const double v = lemma1_bound(ch, 1.0, cfg).value;
        CHECK(v <= prev);
        prev = v;
    }
}

TEST_CASE("stored lattice table reproduces the streamed bound")
{
    const ShadowingChannel ch{20.0, 6.0};
    const DiscretizationConfig cfg;
    const LatticeTable table([&](double x) { return snr_cdf(ch, x); }, [&](double x) { return snr_survival(ch, x); },
                             cfg);
    for (double theta : {1e-3, 0.3, 1.0, 7.0, 40.0}) {
        const auto a = table.evaluate(theta, cfg.tail_mass_tol);
        const auto b = lemma1_bound(ch, theta, cfg);
        CHECK(a.value == Approx(b.value).epsilon(1e-12));
        CHECK(a.log_value == Approx(b.log_value).epsilon(1e-12));
    }
}

TEST_CASE("log value stays accurate near one and for huge exponents")
{
    const ShadowingChannel ch{25.0, 8.0};
    const auto small = lemma1_bound(ch, 1e-9, {});
    CHECK(small.log_value < 0.0);
    CHECK(small.log_value == Approx(-1e-9 * 5.76).epsilon(0.1));

    double prev = 1.0;
    for (double theta : {50.0, 200.0, 1000.0, 5000.0}) {
        const auto r = lemma1_bound(ch, theta, {});
        CHECK(std::isfinite(r.log_value));
        CHECK(r.log_value < prev);
        prev = r.log_value;
    }
}

TEST_CASE("deterministic channel brackets the exact power")
{
    const ShadowingChannel ch{25.0, 0.0};
    const double g = ch.median_snr();
    for (double theta : {0.5, 3.0}) {
        const double v = lemma1_bound(ch, theta, with_step(0.01)).value;
        CHECK(v >= std::pow(1.0 + g, -theta));
        CHECK(v <= std::pow(1.0 + g - 0.02, -theta));
        CHECK(exact_inverse_moment(ch, theta).value == Approx(std::pow(1.0 + g, -theta)).epsilon(1e-14));
    }
}

TEST_CASE("bound dominates a Monte Carlo estimate")
{
    const ShadowingChannel ch{25.0, 8.0};
    Rng gen = child_rng(77, 0);
    SnrSampler s(ch);
    const std::size_t n = 1'000'000;
    const double theta = 1.0;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::pow(1.0 + s(gen), -theta);
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(mean <= lemma1_bound(ch, theta, {}).value + 4.0 * se);
    CHECK(std::abs(mean - exact_inverse_moment(ch, theta).value) < 4.0 * se);
}

TEST_CASE("contract violations in the supplied distribution are reported")
{
    auto decreasing = [](double x) { return x < 1.0 ? 0.5 : 0.2; };
    CHECK_THROWS_AS(lemma1_bound(decreasing, 1.0, DiscretizationConfig{}), ContractError);
    auto above_one = [](double x) { return x < 1.0 ? 0.5 : 1.5; };
    CHECK_THROWS_AS(lemma1_bound(above_one, 1.0, DiscretizationConfig{}), ContractError);
    CHECK_THROWS_AS(lemma1_bound(exp1_cdf, -1.0, DiscretizationConfig{}), DomainError);
    CHECK_THROWS_AS(lemma1_bound(exp1_cdf, 1.0, with_step(0.0)), DomainError);
}

TEST_CASE("refinement that cannot converge reports a numerical error")
{
    DiscretizationConfig cfg;
    cfg.refine_to_limit = true;
    cfg.refine_rel_tol = 1e-15;
    cfg.min_step = 1e-3;
    CHECK_THROWS_AS(lemma1_bound(exp1_cdf, 1.0, cfg), NumericalError);
}
