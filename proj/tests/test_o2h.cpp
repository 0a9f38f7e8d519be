// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include <cmath>

#include "doctest.h"
#include "qsim/o2h.hpp"

using namespace qsim;
using namespace qsim::o2h;

TEST_CASE("identical oracles give identical accept probabilities") {
    Rng rng(3);
    const auto rep = o2h_experiment(family_empty_set(5, 3), 40, rng);
    CHECK(rep.p_left == doctest::Approx(rep.p_right).epsilon(1e-12));
    CHECK(rep.p_guess == 0.0);
    CHECK(rep.bound_holds);
    CHECK(rep.every_run_bound);
}

TEST_CASE("planted probe separates maximally with guess probability 1/d") {
    for (int depth : {1, 2, 3, 4}) {
        Rng rng(5 + depth);
        const auto rep = o2h_experiment(family_planted_probe(5, depth), 30, rng);
        CHECK(rep.p_left == doctest::Approx(1.0));
        CHECK(rep.p_right == doctest::Approx(0.0));
        CHECK(rep.p_guess == doctest::Approx(1.0 / depth));
        CHECK(rep.every_run_bound);
    }
}

TEST_CASE("uniform-query adversary keeps the bound with a fat marked set") {
    Rng rng(7);
    const auto rep = o2h_experiment(family_uniform_queries(5, 3), 60, rng);
    CHECK(rep.every_run_bound);
    CHECK(rep.bound_holds);
    CHECK(rep.p_guess > 0.05);  // roughly a quarter of the domain is marked
}

TEST_CASE("adaptive and amplitude-amplification families satisfy the bound per run") {
    Rng rng(9);
    for (const auto& fam : {family_adaptive_coherent(5, 3), family_grover(5, 4)}) {
        const auto rep = o2h_experiment(fam, 50, rng);
        CHECK(rep.every_run_bound);
        CHECK(rep.bound_holds);
    }
}

TEST_CASE("reduction-shaped family keeps the averaged guess bound") {
    Rng rng(11);
    const auto fam = family_hybrid_reduction(3, 2, 2);
    const auto rep = o2h_experiment(fam, 40, rng);
    CHECK(rep.depth == 4);
    CHECK(rep.every_run_bound);
    CHECK(rep.bound_holds);
    // union bound: (copies + classical queries) / 2^lambda
    CHECK(rep.p_guess <= (2.0 + 2.0) / 8.0);
}

TEST_CASE("declared depth must match the instance") {
    O2hFamily broken = family_empty_set(4, 2);
    broken.depth = 3;
    Rng rng(13);
    CHECK_THROWS_AS(o2h_single(broken, rng), Error);
}
