// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include <cmath>

#include "doctest.h"
#include "qsim/haar.hpp"
#include "qsim/linalg.hpp"
#include "qsim/rng.hpp"

using namespace qsim;

namespace {

Matrix random_hermitian(int n, Rng& rng) {
    Matrix a(n);
    for (int r = 0; r < n; ++r) {
        a.at(r, r) = rng.gaussian();
        for (int c = r + 1; c < n; ++c) {
            a.at(r, c) = cplx(rng.gaussian(), rng.gaussian());
            a.at(c, r) = std::conj(a.at(r, c));
        }
    }
    return a;
}

}  // namespace

TEST_CASE("eigendecomposition of a diagonal matrix sorts descending") {
    Matrix a(3);
    a.at(0, 0) = 1.0;
    a.at(1, 1) = 5.0;
    a.at(2, 2) = -2.0;
    const auto eig = hermitian_eig(a);
    CHECK(eig.values[0] == doctest::Approx(5.0));
    CHECK(eig.values[1] == doctest::Approx(1.0));
    CHECK(eig.values[2] == doctest::Approx(-2.0));
}

TEST_CASE("eigenpairs of random Hermitian matrices have tiny residuals") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.bits(3));  // up to 9
        const Matrix a = random_hermitian(n, rng);
        const auto eig = hermitian_eig(a);
        for (int j = 0; j < n; ++j) {
            std::vector<cplx> v(n);
            for (int r = 0; r < n; ++r) v[r] = eig.vectors.at(r, j);
            const auto av = a.mul(v);
            double res = 0.0;
            for (int r = 0; r < n; ++r) res += std::norm(av[r] - eig.values[j] * v[r]);
            CHECK(std::sqrt(res) < 1e-10);
        }
        // eigenvector matrix is unitary
        CHECK(eig.vectors.is_unitary(1e-10));
    }
}

TEST_CASE("non-Hermitian input is rejected") {
    Matrix a(2);
    a.at(0, 1) = 1.0;
    CHECK_THROWS_AS(hermitian_eig(a), Error);
}

TEST_CASE("phase convention makes the first significant entry real positive") {
    Rng rng(11);
    const Matrix a = random_hermitian(5, rng);
    const auto eig = hermitian_eig(a);
    for (int j = 0; j < 5; ++j) {
        for (int r = 0; r < 5; ++r) {
            const cplx e = eig.vectors.at(r, j);
            if (std::abs(e) > 1e-12) {
                CHECK(e.real() > 0.0);
                CHECK(std::abs(e.imag()) < 1e-10);
                break;
            }
        }
    }
}

TEST_CASE("haar unitaries are unitary to 1e-10") {
    Rng rng(13);
    for (int n = 1; n <= 4; ++n) CHECK(haar_unitary_matrix(n, rng).is_unitary(1e-10));
}

TEST_CASE("mean of haar unitary entries vanishes") {
    Rng rng(15);
    cplx acc(0, 0);
    int count = 0;
    for (int i = 0; i < 10000; ++i) {
        const Matrix u = haar_unitary_matrix(1, rng);
        for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c) {
                acc += u.at(r, c);
                ++count;
            }
    }
    // Entry variance is 1/dim = 1/2; allow 3 standard errors on each part.
    const double se = std::sqrt(0.5 / count);
    CHECK(std::abs(acc.real() / count) < 3.0 * se);
    CHECK(std::abs(acc.imag() / count) < 3.0 * se);
}
