// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include <cmath>
#include <vector>

#include "doctest.h"
#include "qsim/rng.hpp"
#include "qsim/stats.hpp"

using namespace qsim;

TEST_CASE("identical seeds reproduce identical streams") {
    Rng a(12345), b(12345);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds and substreams diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i) same += a.next_u64() == b.next_u64();
    CHECK(same == 0);

    Rng s0 = Rng::substream(7, 0), s1 = Rng::substream(7, 1);
    same = 0;
    for (int i = 0; i < 64; ++i) same += s0.next_u64() == s1.next_u64();
    CHECK(same == 0);
}

TEST_CASE("uniform stays in [0,1) with mean 1/2") {
    Rng rng(9);
    std::vector<double> xs;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        xs.push_back(u);
    }
    CHECK(std::abs(mean(xs) - 0.5) < 4.0 * standard_error(xs));
}

TEST_CASE("bits produces values below 2^k") {
    Rng rng(17);
    for (int k = 1; k <= 20; ++k)
        for (int i = 0; i < 100; ++i) CHECK(rng.bits(k) < (std::uint64_t(1) << k));
}

TEST_CASE("gaussian has unit variance and zero mean") {
    Rng rng(21);
    std::vector<double> xs;
    for (int i = 0; i < 100000; ++i) xs.push_back(rng.gaussian());
    CHECK(std::abs(mean(xs)) < 4.0 * standard_error(xs));
    const double sd = sample_sd(xs);
    CHECK(sd == doctest::Approx(1.0).epsilon(0.02));
}
