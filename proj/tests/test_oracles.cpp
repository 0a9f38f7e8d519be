// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include <set>

#include "doctest.h"
#include "qsim/haar.hpp"
#include "qsim/oracles.hpp"
#include "qsim/stats.hpp"

using namespace qsim;

TEST_CASE("random functions are reproducible under a fixed seed") {
    Rng a(42), b(42);
    const auto f = sample_random_function(1, 1, a);
    const auto g = sample_random_function(1, 1, b);
    CHECK(f == g);
    CHECK(f.table().size() == 2);
}

TEST_CASE("random function output is uniform") {
    std::vector<std::size_t> counts(2, 0);
    for (int i = 0; i < 10000; ++i) {
        Rng rng = Rng::substream(7, static_cast<std::uint64_t>(i));
        counts[sample_random_function(1, 1, rng).eval(0)]++;
    }
    CHECK(chi2_uniform(counts) < chi2_quantile_999(1));
}

TEST_CASE("different seeds give different tables") {
    int differing = 0;
    for (int i = 0; i < 50; ++i) {
        Rng a = Rng::substream(1, static_cast<std::uint64_t>(i));
        Rng b = Rng::substream(2, static_cast<std::uint64_t>(i));
        differing += !(sample_random_function(3, 4, a) == sample_random_function(3, 4, b));
    }
    CHECK(differing == 50);
}

TEST_CASE("domain budget is enforced") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_random_function(21, 1, rng), BudgetError);
    CHECK_THROWS_AS(toy_prf(7, 3, 1), BudgetError);
}

TEST_CASE("toy prf is deterministic with distinct per-key tables") {
    const auto prf = toy_prf(2, 99);
    CHECK(prf.out_bits() == 6);  // default three times lambda
    for (std::uint64_t k = 0; k < 4; ++k)
        for (std::uint64_t x = 0; x < 4; ++x) CHECK(prf.eval(k, x) == prf.eval(k, x));
    std::set<std::vector<std::uint64_t>> tables;
    for (std::uint64_t k = 0; k < 4; ++k) tables.insert(prf.derive(k).table());
    CHECK(tables.size() == 4);
}

TEST_CASE("hex serialization round-trips") {
    Rng rng(5);
    const auto f = sample_random_function(4, 9, rng);
    CHECK(ClassicalFunction::from_hex(f.to_hex()) == f);
}

TEST_CASE("table entries wider than the output range are rejected") {
    CHECK_THROWS_AS(ClassicalFunction(1, 2, {0, 4}), Error);
    CHECK_THROWS_AS(ClassicalFunction(1, 2, {0}), Error);
}

TEST_CASE("zero oracle lifts to the identity") {
    const ClassicalFunction zero(2, 2, {0, 0, 0, 0});
    const RegisterLayout L{{"x", 2}, {"y", 2}};
    CHECK(lift_to_oracle(zero, "x", "y").materialize(L).max_abs_diff(Matrix::identity(16)) ==
          doctest::Approx(0.0));
}

TEST_CASE("lifted oracles are self-inverse permutations") {
    Rng rng(9);
    const auto f = sample_random_function(2, 2, rng);
    const RegisterLayout L{{"x", 2}, {"y", 2}};
    const UnitaryOp u = lift_to_oracle(f, "x", "y");
    const Matrix m = u.materialize(L);
    // exactly one unit entry per row and column, all entries 0 or 1
    for (int r = 0; r < m.dim(); ++r) {
        int row_ones = 0, col_ones = 0;
        for (int c = 0; c < m.dim(); ++c) {
            const double ar = std::abs(m.at(r, c)), ac = std::abs(m.at(c, r));
            CHECK((ar == 0.0 || ar == 1.0));
            row_ones += ar == 1.0;
            col_ones += ac == 1.0;
        }
        CHECK(row_ones == 1);
        CHECK(col_ones == 1);
    }
    // involution, exactly
    const StateVector s = haar_state(L, rng);
    const StateVector twice = u.apply(u.apply(s));
    for (std::uint64_t i = 0; i < s.dim(); ++i) CHECK(twice.amp(i) == s.amp(i));
}

TEST_CASE("oracle on the uniform superposition prepares the graph state of f") {
    Rng rng(11);
    const auto f = sample_random_function(2, 3, rng);
    const RegisterLayout L{{"x", 2}, {"y", 3}};
    const StateVector s = UnitaryOp::compose({UnitaryOp::hadamard_layer("x"),
                                              lift_to_oracle(f, "x", "y")})
                              .apply(StateVector::zero(L));
    for (std::uint64_t i = 0; i < s.dim(); ++i) {
        const std::uint64_t x = L.value(i, "x"), y = L.value(i, "y");
        if (y == f.eval(x))
            CHECK(std::abs(s.amp(i)) == doctest::Approx(0.5));
        else
            CHECK(std::abs(s.amp(i)) == doctest::Approx(0.0));
    }
}

TEST_CASE("controlled keyed adjoint inverts exactly on the matching key") {
    const auto fam = KeyedUnitaryFamily::haar(2, 2, 1234);
    const int m = 2;
    const RegisterLayout L{{"prs0", 2}, {"prs1", 2}, {"sk", 2}};
    const UnitaryOp op = controlled_keyed_adjoint(fam, m);
    for (std::uint64_t key = 0; key < 4; ++key) {
        const StateVector psi = fam.member_state(key);
        StateVector joint = tensor(
            tensor(unchecked_state(RegisterLayout{{"prs0", 2}}, psi.amps()),
                   unchecked_state(RegisterLayout{{"prs1", 2}}, psi.amps())),
            StateVector::basis(RegisterLayout{{"sk", 2}}, key));
        const StateVector inverted = op.apply(joint);
        const StateVector want = StateVector::basis(L, {0, 0, key});
        CHECK(fidelity(inverted, want) == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("single-key families reduce to the plain adjoint") {
    Rng rng(17);
    const Matrix u = haar_unitary_matrix(2, rng);
    const auto fam = KeyedUnitaryFamily::identical(1, u);
    const RegisterLayout L{{"prs0", 2}, {"sk", 1}};
    const Matrix controlled = controlled_keyed_adjoint(fam, 1).materialize(L);

    const UnitaryOp plain = UnitaryOp::dense({"prs0"}, u).adjoint();
    const Matrix want = plain.materialize(L);
    CHECK(controlled.max_abs_diff(want) <= 1e-12);
}

TEST_CASE("controlled keyed blocks are unitary and key-diagonal") {
    const auto fam = KeyedUnitaryFamily::haar(1, 2, 777);
    const RegisterLayout L{{"prs0", 2}, {"sk", 1}};
    const UnitaryOp op = controlled_keyed_adjoint(fam, 1);
    const Matrix m = op.materialize(L);
    CHECK(m.is_unitary(1e-10));

    // commutes with unitaries diagonal in the key basis
    Matrix phases(2);
    phases.at(0, 0) = cplx(std::cos(0.7), std::sin(0.7));
    phases.at(1, 1) = cplx(std::cos(-1.1), std::sin(-1.1));
    const Matrix d = UnitaryOp::dense({"sk"}, phases).materialize(L);
    CHECK(m.mul(d).max_abs_diff(d.mul(m)) <= 1e-10);
}

TEST_CASE("pk preparation members build the expected superposition") {
    const auto prf = toy_prf(2, 2, 31);
    const auto fam = KeyedUnitaryFamily::pk_preparation(prf);
    for (std::uint64_t k = 0; k < 4; ++k) {
        const StateVector s = fam.member_state(k);
        const RegisterLayout local{{"x", 2}, {"y", 2}};
        for (std::uint64_t i = 0; i < s.dim(); ++i) {
            const std::uint64_t x = local.value(i, "x"), y = local.value(i, "y");
            const double want = y == prf.eval(k, x) ? 0.5 : 0.0;
            CHECK(std::abs(s.amp(i)) == doctest::Approx(want));
        }
    }
}
