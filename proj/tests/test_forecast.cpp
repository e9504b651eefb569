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

#include <algorithm>
#include <random>

#include "cloudfarm/forecast.hpp"

using namespace cloudfarm;
using Catch::Matchers::WithinAbs;

TEST_CASE("Holt smoothing fixed points and hand values", "[forecast]") {
    HoltSmoother constant(0.5, 0.5);
    for (int i = 0; i < 10; ++i) constant.update(5.0);
    CHECK_THAT(constant.forecast(), WithinAbs(5.0, 1e-12));

    HoltSmoother eager(1.0, 1.0);
    eager.update(1.0);
    eager.update(2.0);
    CHECK_THAT(eager.update(3.0), WithinAbs(4.0, 1e-12));

    HoltSmoother halves(0.5, 0.5);
    halves.update(10.0);
    CHECK_THAT(halves.update(12.0), WithinAbs(14.0, 1e-12));
    CHECK_THAT(halves.level(), WithinAbs(12.0, 1e-12));
    CHECK_THAT(halves.trend(), WithinAbs(2.0, 1e-12));
    CHECK_THAT(halves.update(14.0), WithinAbs(16.0, 1e-12));
}

TEST_CASE("Holt tracks a noise-free linear series exactly", "[forecast]") {
    for (double alpha = 0.25; alpha <= 1.0; alpha += 0.25) {
        for (double beta = 0.25; beta <= 1.0; beta += 0.25) {
            HoltSmoother smoother(alpha, beta);
            const double intercept = 3.0;
            const double slope = 0.7;
            double forecast = 0.0;
            for (int k = 0; k < 20; ++k) {
                const double observed = intercept + slope * k;
                if (k >= 2) {
                    REQUIRE_THAT(forecast, WithinAbs(observed, 1e-9));
                }
                forecast = smoother.update(observed);
            }
        }
    }
}

TEST_CASE("Holt rejects bad inputs", "[forecast]") {
    CHECK_THROWS_AS(HoltSmoother(0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(HoltSmoother(0.5, 1.5), std::invalid_argument);
    HoltSmoother s;
    CHECK_THROWS_AS(s.update(-1.0), std::invalid_argument);
}

TEST_CASE("relative error recording", "[forecast]") {
    ErrorHistory history(10);
    history.record(100.0, 111.0);
    CHECK_THAT(history.errors().back(), WithinAbs(0.11, 1e-12));
    history.record(50.0, 50.0);
    CHECK(history.errors().back() == 0.0);
    history.record(100.0, 90.0);
    CHECK_THAT(history.errors().back(), WithinAbs(-0.10, 1e-12));
    CHECK(history.size() == 3);

    history.record(0.0, 10.0);   // cannot normalize
    history.record(100.0, 0.0);  // zero-rate epoch
    CHECK(history.size() == 3);
    CHECK(history.skipped() == 2);
}

TEST_CASE("window eviction", "[forecast]") {
    ErrorHistory history(4);
    for (int i = 1; i <= 8; ++i) history.record(100.0, 100.0 + i);
    CHECK(history.size() == 4);
    CHECK_THAT(history.errors().front(), WithinAbs(0.05, 1e-12));
}

TEST_CASE("nearest-rank percentile", "[forecast]") {
    ErrorHistory history(10);
    for (const double e : {-0.1, 0.0, 0.1, 0.2}) history.record(1.0, 1.0 + e);
    CHECK_THAT(history.percentile(0.95), WithinAbs(0.2, 1e-12));
    CHECK_THAT(history.percentile(0.5), WithinAbs(0.0, 1e-12));

    ErrorHistory repeated(10);
    for (int i = 0; i < 7; ++i) repeated.record(100.0, 111.0);
    CHECK_THAT(repeated.percentile(0.95), WithinAbs(0.11, 1e-12));

    ErrorHistory tiny(10);
    for (const double e : {-1e-3, 0.0, 1e-3}) tiny.record(1.0, 1.0 + e);
    CHECK(tiny.percentile(0.5) == 0.0);

    ErrorHistory empty(10);
    CHECK(empty.percentile(0.95) == 0.11);
    CHECK_THROWS_AS(empty.percentile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(empty.percentile(1.0), std::invalid_argument);
}

TEST_CASE("percentile is monotone in x and bounded by the sample", "[forecast]") {
    std::mt19937 gen(99);
    std::normal_distribution<double> noise(0.0, 0.2);
    ErrorHistory history(200);
    double lo = 1e9;
    double hi = -1e9;
    for (int i = 0; i < 150; ++i) {
        const double e = noise(gen);
        history.record(100.0, 100.0 * (1.0 + e));
        lo = std::min(lo, history.errors().back());
        hi = std::max(hi, history.errors().back());
    }
    double prev = -1e9;
    for (double x = 0.05; x < 1.0; x += 0.05) {
        const double p = history.percentile(x);
        REQUIRE(p >= prev);
        REQUIRE(p >= lo);
        REQUIRE(p <= hi);
        prev = p;
    }
}

TEST_CASE("95th percentile margin covers resampled errors", "[forecast]") {
    std::mt19937 gen(1234);
    std::lognormal_distribution<double> noise(0.0, 0.15);
    ErrorHistory history(400);
    std::vector<double> pool;
    for (int i = 0; i < 400; ++i) {
        history.record(100.0, 100.0 * noise(gen));
        pool.push_back(history.errors().back());
    }
    const double margin = history.percentile(0.95);
    // Resample from the empirical distribution itself: exceedance of the
    // nearest-rank 95th percentile stays below 5% plus 3 sigma of the
    // binomial fluctuation.
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const int draws = 20000;
    int exceed = 0;
    for (int i = 0; i < draws; ++i) {
        if (pool[pick(gen)] > margin) ++exceed;
    }
    const double fraction = static_cast<double>(exceed) / draws;
    const double sigma = std::sqrt(0.05 * 0.95 / draws);
    CHECK(fraction <= 0.05 + 3.0 * sigma);
}

TEST_CASE("allocation margin falls back until enough history", "[forecast]") {
    ErrorHistory history(100, 0.11, 50);
    for (int i = 0; i < 49; ++i) history.record(100.0, 130.0);
    CHECK(history.margin(0.95) == 0.11);
    history.record(100.0, 130.0);
    CHECK_THAT(history.margin(0.95), WithinAbs(0.30, 1e-12));
}
