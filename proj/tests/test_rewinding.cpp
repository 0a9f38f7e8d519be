// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include <cmath>

#include "doctest.h"
#include "qsim/haar.hpp"
#include "qsim/rewinding.hpp"
#include "qsim/stats.hpp"

using namespace qsim;
using namespace qsim::rewind;

namespace {

// Flag rotation conditioned on the system qubit: eigenvalues q + eps on |0>,
// q - eps on |1>.
AmplifierInstance rotation_instance(double q, double eps) {
    Matrix u(4);
    for (int b = 0; b < 2; ++b) {
        const double p = b == 0 ? q + eps : q - eps;
        const double c = std::sqrt(1.0 - p), s = std::sqrt(p);
        u.at(2 * b + 0, 2 * b + 0) = c;
        u.at(2 * b + 1, 2 * b + 0) = s;
        u.at(2 * b + 0, 2 * b + 1) = -s;
        u.at(2 * b + 1, 2 * b + 1) = c;
    }
    RegisterLayout layout{{"sys", 1}, {"out", 1}};
    return AmplifierInstance{layout,
                             {"sys"},
                             {"out"},
                             UnitaryOp::dense({"sys", "out"}, u),
                             Projector::segment_equals("out", 1),
                             {}};
}

AmplifierInstance haar_instance(int nsys, int nanc, Rng& rng) {
    RegisterLayout layout{{"sys", nsys}, {"anc", nanc}};
    return AmplifierInstance{layout,
                             {"sys"},
                             {"anc"},
                             UnitaryOp::dense({"sys", "anc"}, haar_unitary_matrix(nsys + nanc, rng)),
                             Projector::bit_equals("anc", nanc - 1, 1),
                             {}};
}

// Expected flag measurements for an eigenvector input, computed from the
// absorbing two-state walk by a direct linear solve (independent of the
// closed form in the library).
double walk_expectation(double p) {
    // E_fresh = 1 + (1-p) * [(1-p) E_fresh + p E_flipped]
    // E_flipped = 1 + p * [(1-p) E_fresh + p E_flipped]
    // Solve the 2x2 system A x = b.
    const double a11 = 1.0 - (1.0 - p) * (1.0 - p), a12 = -(1.0 - p) * p;
    const double a21 = -p * (1.0 - p), a22 = 1.0 - p * p;
    const double det = a11 * a22 - a12 * a21;
    const double e_fresh = (1.0 * a22 - a12 * 1.0) / det;
    return e_fresh;
}

}  // namespace

TEST_CASE("success operator of the trivial instances") {
    // U = identity: the flag never fires, P = 0.
    {
        RegisterLayout layout{{"sys", 2}, {"out", 1}};
        AmplifierInstance inst{layout, {"sys"}, {"out"}, UnitaryOp::identity(),
                               Projector::segment_equals("out", 1), {}};
        const Matrix p = build_P(inst);
        CHECK(p.max_abs_diff(Matrix(p.dim())) <= 1e-12);
    }
    // U flips the flag unconditionally: P = identity.
    {
        RegisterLayout layout{{"sys", 2}, {"out", 1}};
        AmplifierInstance inst{layout, {"sys"}, {"out"},
                               UnitaryOp::xor_constant("out", 1),
                               Projector::segment_equals("out", 1), {}};
        const Matrix p = build_P(inst);
        CHECK(p.max_abs_diff(Matrix::identity(p.dim())) <= 1e-12);
    }
}

TEST_CASE("success operator is Hermitian with spectrum in the unit interval") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const auto inst = haar_instance(2, 1, rng);
        const Matrix p = build_P(inst);
        CHECK(p.hermiticity_residual() <= 1e-10);
        const auto eig = hermitian_eig(p);
        for (double v : eig.values) {
            CHECK(v >= -1e-10);
            CHECK(v <= 1.0 + 1e-10);
        }
    }
}

TEST_CASE("balanced flag rotation has all eigenvalues one half") {
    const auto inst = rotation_instance(0.5, 0.0);
    const auto sd = eigen_decompose(inst, build_P(inst));
    for (double v : sd.eigenvalues) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("branch bases are orthonormal and reconstruct the image") {
    for (int nsys = 2; nsys <= 4; ++nsys) {
        for (int trial = 0; trial < 20; ++trial) {
            Rng rng = Rng::substream(41 + nsys, static_cast<std::uint64_t>(trial));
            const auto inst = haar_instance(nsys, 1, rng);
            const Matrix p = build_P(inst);
            const auto sd = eigen_decompose(inst, p);
            const auto rep = verify_orthonormal_basis(inst, p, sd);
            CHECK(rep.max_gram_residual <= 1e-8);
            CHECK(rep.max_reconstruction_residual <= 1e-8);
            CHECK(rep.max_eigen_residual <= 1e-8);
            CHECK(rep.eig_min >= -1e-10);
            CHECK(rep.eig_max <= 1.0 + 1e-10);
        }
    }
}

TEST_CASE("two-ancilla instances also produce orthonormal branches") {
    Rng rng(47);
    const auto inst = haar_instance(2, 2, rng);
    const Matrix p = build_P(inst);
    const auto sd = eigen_decompose(inst, p);
    const auto rep = verify_orthonormal_basis(inst, p, sd);
    CHECK(rep.max_gram_residual <= 1e-8);
    CHECK(rep.max_reconstruction_residual <= 1e-8);
}

TEST_CASE("degenerate eigenvalues are flagged and excluded") {
    const auto inst = rotation_instance(0.5, 0.5 - 1e-13);  // eigenvalues ~1 and ~0
    const auto sd = eigen_decompose(inst, build_P(inst));
    CHECK(sd.degenerate[0]);
    CHECK(sd.degenerate[1]);
    CHECK(!sd.branch0[0].has_value());
    CHECK(!sd.branch1[1].has_value());
}

TEST_CASE("certain success halts at the first iteration with perfect fidelity") {
    const auto inst = rotation_instance(1.0 - 1e-14, 0.0);
    Rng rng(53);
    const auto tr = rewind_until_success(inst, StateVector::zero(inst.system_layout()), 10, rng);
    CHECK(tr.halted);
    CHECK(tr.iterations == 1);
    CHECK(tr.target_fidelity == doctest::Approx(1.0));
}

TEST_CASE("walk expectation matches the closed form") {
    for (double p : {0.9, 0.5, 0.25, 0.125, 0.03125}) {
        CHECK(walk_expectation(p) == doctest::Approx(expected_iterations_eigenvector(p))
                                          .epsilon(1e-12));
    }
}

TEST_CASE("mean iterations for eigenvector inputs follow the walk expectation") {
    for (double q : {0.5, 0.25, 0.125}) {
        const auto inst = rotation_instance(q, 0.0);
        std::vector<double> iters;
        for (int t = 0; t < 2000; ++t) {
            Rng rng = Rng::substream(59, static_cast<std::uint64_t>(t) * 8 +
                                             static_cast<std::uint64_t>(q * 16));
            const auto tr =
                rewind_until_success(inst, StateVector::zero(inst.system_layout()), 1 << 20, rng);
            REQUIRE(tr.halted);
            iters.push_back(tr.iterations);
            CHECK(tr.target_fidelity >= 1.0 - 1e-9);
        }
        const double expect = walk_expectation(q);
        CHECK(std::abs(mean(iters) - expect) <= 0.1 * expect);
    }
}

TEST_CASE("failure tail decays at least as fast as the halving rate") {
    for (double q : {0.5, 0.25, 0.125}) {
        const auto inst = rotation_instance(q, 0.0);
        const int runs = 4000, k_max = 12;
        std::vector<int> iterations;
        for (int t = 0; t < runs; ++t) {
            Rng rng = Rng::substream(61, static_cast<std::uint64_t>(t) * 16 +
                                             static_cast<std::uint64_t>(q * 32));
            const auto tr = rewind_until_success(inst, StateVector::zero(inst.system_layout()),
                                                 1 << 20, rng);
            REQUIRE(tr.halted);
            iterations.push_back(tr.iterations);
        }
        // Fit the geometric tail rate q' from the survival curve
        // P[T > k] ~ C (1 - q')^k over k = 2..k_max and require q' >= q / 2.
        double sum_k = 0.0, sum_y = 0.0, sum_kk = 0.0, sum_ky = 0.0;
        int points = 0;
        for (int k = 2; k <= k_max; ++k) {
            int survived = 0;
            for (int it : iterations) survived += it > k;
            if (survived == 0) break;
            const double y = std::log(static_cast<double>(survived) / runs);
            sum_k += k;
            sum_y += y;
            sum_kk += static_cast<double>(k) * k;
            sum_ky += k * y;
            ++points;
        }
        REQUIRE(points >= 3);
        const double slope =
            (points * sum_ky - sum_k * sum_y) / (points * sum_kk - sum_k * sum_k);
        const double fitted_rate = 1.0 - std::exp(slope);
        CHECK(fitted_rate >= q / 2.0);
        // and the fitted rate matches the walk's retry success 2q(1-q)
        CHECK(fitted_rate == doctest::Approx(2.0 * q * (1.0 - q)).epsilon(0.15));
    }
}

TEST_CASE("unbalanced spread keeps high output fidelity on superposed inputs") {
    for (double q : {0.5, 0.25}) {
        double prev_median = 0.0;
        for (double eps : {1e-3, 3e-4, 1e-4}) {
            const auto inst = rotation_instance(q, eps);
            const RegisterLayout sys = inst.system_layout();
            const double inv = 1.0 / std::sqrt(2.0);
            const StateVector plus = unchecked_state(sys, {cplx(inv, 0), cplx(inv, 0)});
            Rng rng(67);
            const auto rep = rewind_statistics(inst, {plus}, eps, q, 500, rng);
            CHECK(rep.halted_runs == rep.runs);
            CHECK(rep.median_fidelity >= 1.0 - 10.0 * eps);
            // fidelity improves (weakly) as the spread shrinks
            CHECK(rep.median_fidelity >= prev_median - 1e-12);
            prev_median = rep.median_fidelity;
        }
    }
}

TEST_CASE("statistics enforce the eigenvalue spread precondition") {
    const auto inst = rotation_instance(0.25, 0.05);
    const RegisterLayout sys = inst.system_layout();
    Rng rng(71);
    CHECK_THROWS_AS(
        rewind_statistics(inst, {StateVector::zero(sys)}, 1e-6, 0.25, 10, rng), Error);
}

TEST_CASE("max_iter exhaustion reports an unhalted transcript") {
    const auto inst = rotation_instance(1e-4, 0.0);
    Rng rng(73);
    const auto tr = rewind_until_success(inst, StateVector::zero(inst.system_layout()), 3, rng);
    CHECK(!tr.halted);
    CHECK(tr.iterations == 3);
    CHECK(tr.flag_outcomes.size() == 3);
}

TEST_CASE("identical seeds give identical transcripts") {
    const auto inst = rotation_instance(0.25, 0.0);
    auto run = [&](std::uint64_t seed) {
        Rng rng(seed);
        return rewind_until_success(inst, StateVector::zero(inst.system_layout()), 1 << 20, rng);
    };
    const auto a = run(99), b = run(99);
    CHECK(a.iterations == b.iterations);
    CHECK(a.flag_outcomes == b.flag_outcomes);
    CHECK(a.ancilla_outcomes == b.ancilla_outcomes);
    CHECK(fidelity(a.final_state, b.final_state) == doctest::Approx(1.0));
}

TEST_CASE("inputs must live on the system layout") {
    const auto inst = rotation_instance(0.25, 0.0);
    Rng rng(79);
    const StateVector wrong = StateVector::zero(RegisterLayout{{"sys", 2}});
    CHECK_THROWS_AS(rewind_until_success(inst, wrong, 10, rng), Error);
}
