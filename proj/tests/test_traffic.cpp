// Copyright 2026 The cloudfarm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cloudfarm/traffic.hpp"
#include "oracles.hpp"

using namespace cloudfarm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("overflow stream moments", "[traffic]") {
    const TrafficStream s = overflow_stream(TrafficStream::poisson(1.0), 1);
    CHECK_THAT(s.mean, WithinAbs(0.5, 1e-15));
    CHECK_THAT(s.variance, WithinAbs(7.0 / 12.0, 1e-12));  // 0.58333...
    CHECK_THAT(s.peakedness(), WithinAbs(7.0 / 6.0, 1e-12));

    // Zero primary servers pass the Poisson stream through unchanged.
    const TrafficStream through = overflow_stream(TrafficStream::poisson(5.0), 0);
    CHECK_THAT(through.mean, WithinAbs(5.0, 1e-12));
    CHECK_THAT(through.variance, WithinAbs(5.0, 1e-12));
    CHECK_THAT(through.peakedness(), WithinAbs(1.0, 1e-12));

    const TrafficStream none = overflow_stream(TrafficStream::poisson(0.0), 3);
    CHECK(none.mean == 0.0);
    CHECK(none.variance == 0.0);

    CHECK_THROWS_AS(overflow_stream(TrafficStream{1.0, 2.0}, 1), std::domain_error);
    CHECK_THROWS_AS(overflow_stream(TrafficStream::poisson(1.0), -1), std::domain_error);
}

TEST_CASE("overflow traffic is bursty", "[traffic]") {
    for (double rho = 0.5; rho <= 50.0; rho += 0.5) {
        for (int n = 1; n <= 50; ++n) {
            const TrafficStream s = overflow_stream(TrafficStream::poisson(rho), n);
            REQUIRE(s.mean <= rho);
            REQUIRE(s.variance >= s.mean);
            REQUIRE(s.peakedness() > 1.0);
        }
    }
}

TEST_CASE("Riordan denominator stays positive under heavy overload", "[traffic]") {
    // The denominator is n + 1 minus the carried load, so it is >= 1 even
    // when the offered load dwarfs the group.
    for (const double rho : {10.0, 100.0, 1000.0, 10000.0}) {
        for (const int n : {1, 5, 20, 50}) {
            const double omega = rho * erlang_b_integer(n, rho);
            const double denominator = n + 1.0 - rho + omega;
            REQUIRE(denominator >= 1.0 - 1e-9);
            const TrafficStream s = overflow_stream(TrafficStream::poisson(rho), n);
            REQUIRE(std::isfinite(s.variance));
            REQUIRE(s.variance > 0.0);
        }
    }
}

TEST_CASE("superposition adds moments", "[traffic]") {
    const TrafficStream sum = superpose({TrafficStream::poisson(2.0), TrafficStream::poisson(3.0)});
    CHECK_THAT(sum.mean, WithinAbs(5.0, 1e-15));
    CHECK_THAT(sum.variance, WithinAbs(5.0, 1e-15));
    CHECK_THAT(sum.peakedness(), WithinAbs(1.0, 1e-15));

    const TrafficStream mixed = superpose({TrafficStream{0.5, 0.58333}, TrafficStream{2.0, 2.0}});
    CHECK_THAT(mixed.mean, WithinAbs(2.5, 1e-12));
    CHECK_THAT(mixed.variance, WithinAbs(2.58333, 1e-12));

    const TrafficStream single = superpose({TrafficStream{1.5, 2.5}});
    CHECK(single.mean == 1.5);
    CHECK(single.variance == 2.5);

    const TrafficStream empty = superpose(std::initializer_list<TrafficStream>{});
    CHECK(empty.mean == 0.0);
    CHECK(empty.peakedness() == 1.0);
}

TEST_CASE("Hayward blocking", "[traffic]") {
    // Z = 1 reduces exactly to Erlang-B.
    CHECK(hayward_blocking(2.0, TrafficStream::poisson(1.0)) == erlang_b_integer(2, 1.0));
    // Z = 2 with n = 2, rho = 2 substitutes to B(1, 1).
    CHECK_THAT(hayward_blocking(2.0, TrafficStream{2.0, 4.0}), WithinAbs(0.5, 1e-12));
    // Fractional case against the quadrature oracle.
    const TrafficStream bursty{10.0, 14.0};
    CHECK_THAT(hayward_blocking(20.0, bursty),
               WithinRel(oracles::erlang_b_quadrature(20.0 / 1.4, 10.0 / 1.4), 1e-9));
    CHECK_THROWS_AS(hayward_blocking(2.0, TrafficStream{1.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(hayward_blocking(-1.0, TrafficStream::poisson(1.0)), std::domain_error);
}

TEST_CASE("Hayward is exact against the stationary distribution at Z=1", "[traffic]") {
    for (const double rho : {0.5, 4.0, 12.0}) {
        for (const int n : {1, 5, 20}) {
            const double expected = stationary_distribution(n, rho).blocking;
            CHECK_THAT(hayward_blocking(n, TrafficStream::poisson(rho)), WithinAbs(expected, 1e-12));
        }
    }
}

TEST_CASE("loss split is proportional and exact", "[traffic]") {
    const auto even = split_losses(1.0, {2.0, 2.0}, 4.0);
    CHECK(even[0] == 0.5);
    CHECK(even[1] == 0.5);

    const auto proportional = split_losses(0.3, {1.0, 2.0}, 3.0);
    CHECK_THAT(proportional[0], WithinAbs(0.1, 1e-15));
    CHECK_THAT(proportional[1], WithinAbs(0.2, 1e-15));

    const auto zero = split_losses(0.0, {1.0, 5.0}, 6.0);
    CHECK(zero[0] == 0.0);
    CHECK(zero[1] == 0.0);

    CHECK_THROWS_AS(split_losses(1.0, {1.0, 1.0}, 3.0), std::invalid_argument);
    CHECK_THROWS_AS(split_losses(1.0, {0.0, 0.0}, 0.0), std::domain_error);
}

TEST_CASE("loss split sums to the total bit-for-bit", "[traffic]") {
    std::mt19937 gen(42);
    std::uniform_real_distribution<double> var(0.0, 30.0);
    std::uniform_real_distribution<double> lost(0.0, 100.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double v1 = var(gen);
        const double v2 = var(gen);
        if (v1 + v2 == 0.0) continue;
        const double total = lost(gen);
        const auto parts = split_losses(total, {v1, v2}, v1 + v2);
        REQUIRE(parts[0] >= 0.0);
        REQUIRE(parts[1] >= 0.0);
        REQUIRE(parts[0] + parts[1] == total);
    }
}
