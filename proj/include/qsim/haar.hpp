// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <string>
#include <vector>

#include "qsim/linalg.hpp"
#include "qsim/rng.hpp"
#include "qsim/state.hpp"
#include "qsim/unitary.hpp"

namespace qsim {

/// Haar-random pure state on a given layout: normalized complex Gaussian
/// vector.
inline StateVector haar_state(const RegisterLayout& layout, Rng& rng) {
    std::vector<cplx> amps(layout.dim());
    for (auto& a : amps) a = cplx(rng.gaussian(), rng.gaussian());
    detail::normalize(amps);
    return unchecked_state(layout, std::move(amps));
}

/// Haar-random state on a single n-qubit segment named "psi".
inline StateVector haar_state(int n, Rng& rng) {
    if (n < 1 || n > max_qubits()) throw BudgetError("haar_state: qubit count out of budget");
    return haar_state(RegisterLayout{{"psi", n}}, rng);
}

/// Haar-random unitary matrix of dimension 2^n, from the QR factorization of
/// a complex Ginibre matrix (modified Gram-Schmidt keeps the R diagonal real
/// positive, so no extra phase fix is needed).
inline Matrix haar_unitary_matrix(int n, Rng& rng) {
    if (n < 1 || n > 12) throw BudgetError("haar_unitary_matrix: qubit count out of [1, 12]");
    const int d = 1 << n;
    std::vector<std::vector<cplx>> cols(d, std::vector<cplx>(d));
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) cols[j][i] = cplx(rng.gaussian(), rng.gaussian());
    for (int j = 0; j < d; ++j) {
        for (int pass = 0; pass < 2; ++pass) {  // second pass for orthogonality
            for (int i = 0; i < j; ++i) {
                cplx dot(0, 0);
                for (int r = 0; r < d; ++r) dot += std::conj(cols[i][r]) * cols[j][r];
                for (int r = 0; r < d; ++r) cols[j][r] -= dot * cols[i][r];
            }
        }
        double n2 = 0.0;
        for (int r = 0; r < d; ++r) n2 += std::norm(cols[j][r]);
        const double inv = 1.0 / std::sqrt(n2);
        for (int r = 0; r < d; ++r) cols[j][r] *= inv;
    }
    Matrix m(d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) m.at(i, j) = cols[j][i];
    return m;
}

/// Haar-random unitary as an op on the single segment "psi".
inline UnitaryOp haar_unitary(int n, Rng& rng) {
    return UnitaryOp::dense({"psi"}, haar_unitary_matrix(n, rng));
}

}  // namespace qsim
