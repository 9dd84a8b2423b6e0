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

#include <catch2/catch_amalgamated.hpp>

#include <mmwnc/arrival.hpp>

using namespace mmwnc;
using Catch::Approx;

TEST_CASE("constant-rate arrivals meet the affine envelope with equality")
{
    const AffineEnvelope env{0.0, 2e9};
    const auto a = generate_arrivals(env, 50);
    REQUIRE(a.size() == 50);
    for (double theta : {1e-12, 1e-10, 3e-9}) {
        for (std::size_t s = 0; s < 50; s += 7) {
            for (std::size_t t = s; t <= 50; t += 5) {
                double sum = 0.0;
                for (std::size_t k = s; k < t; ++k) sum += a[k];
                CHECK(theta * sum <= arrival_log_mgf_bound(env, theta, t - s) * (1 + 1e-12) + 1e-300);
            }
        }
    }
}

TEST_CASE("envelope log-MGF is additive over the interval length")
{
    const AffineEnvelope env{0.0, 1e9};
    for (double theta : {1e-11, 5e-10}) {
        for (std::size_t n = 0; n < 20; ++n) {
            for (std::size_t m = 0; m < 20; m += 3) {
                CHECK(arrival_log_mgf_bound(env, theta, n + m) ==
                      Approx(arrival_log_mgf_bound(env, theta, n) + arrival_log_mgf_bound(env, theta, m)).margin(1e-12));
            }
        }
    }
}

TEST_CASE("burst enters once")
{
    const AffineEnvelope env{4e6, 1e9};
    CHECK(arrival_log_mgf_bound(env, 1e-9, 0) == Approx(4e-3));
    CHECK(arrival_log_mgf_bound(env, 1e-9, 3) == Approx(4e-3 + 3.0));
    CHECK(env.log_rate_factor(2e-9) == Approx(2.0));
}

TEST_CASE("arrival domain checks")
{
    const AffineEnvelope env{0.0, 1e9};
    CHECK_THROWS_AS(arrival_log_mgf_bound(env, 0.0, 3), DomainError);
    CHECK_THROWS_AS(arrival_log_mgf_bound(env, -1.0, 3), DomainError);
    CHECK_THROWS_AS((AffineEnvelope{-1.0, 1.0}.validate()), DomainError);
    CHECK_THROWS_AS((AffineEnvelope{0.0, -1.0}.validate()), DomainError);
    CHECK(generate_arrivals(AffineEnvelope{0.0, 0.0}, 3) == std::vector<double>{0.0, 0.0, 0.0});
}
