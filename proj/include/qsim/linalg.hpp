// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "qsim/common.hpp"

namespace qsim {

/// Small dense square complex matrix, row-major.
class Matrix {
  public:
    Matrix() : n_(0) {}
    explicit Matrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, cplx(0, 0)) {}

    static Matrix identity(int n) {
        Matrix m(n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    int dim() const { return n_; }
    cplx& at(int r, int c) { return a_[static_cast<std::size_t>(r) * n_ + c]; }
    const cplx& at(int r, int c) const { return a_[static_cast<std::size_t>(r) * n_ + c]; }

    Matrix adjoint() const {
        Matrix m(n_);
        for (int r = 0; r < n_; ++r)
            for (int c = 0; c < n_; ++c) m.at(r, c) = std::conj(at(c, r));
        return m;
    }

    Matrix mul(const Matrix& rhs) const {
        if (rhs.n_ != n_) throw Error("Matrix::mul: dimension mismatch");
        Matrix m(n_);
        for (int r = 0; r < n_; ++r)
            for (int k = 0; k < n_; ++k) {
                const cplx v = at(r, k);
                if (v == cplx(0, 0)) continue;
                for (int c = 0; c < n_; ++c) m.at(r, c) += v * rhs.at(k, c);
            }
        return m;
    }

    std::vector<cplx> mul(const std::vector<cplx>& x) const {
        if (static_cast<int>(x.size()) != n_) throw Error("Matrix::mul: vector size mismatch");
        std::vector<cplx> y(n_, cplx(0, 0));
        for (int r = 0; r < n_; ++r)
            for (int c = 0; c < n_; ++c) y[r] += at(r, c) * x[c];
        return y;
    }

    /// max_{ij} |A_ij - B_ij|
    double max_abs_diff(const Matrix& rhs) const {
        if (rhs.n_ != n_) throw Error("Matrix::max_abs_diff: dimension mismatch");
        double m = 0.0;
        for (std::size_t i = 0; i < a_.size(); ++i) m = std::max(m, std::abs(a_[i] - rhs.a_[i]));
        return m;
    }

    bool is_unitary(double tol = 1e-10) const {
        return adjoint().mul(*this).max_abs_diff(identity(n_)) <= tol;
    }

    double hermiticity_residual() const { return max_abs_diff(adjoint()); }

  private:
    int n_;
    std::vector<cplx> a_;
};

struct EigResult {
    std::vector<double> values;  // descending
    Matrix vectors;              // columns are eigenvectors, matching order
};

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations. Eigenvalues are returned in descending order; each eigenvector
/// column is phase-fixed so its first entry of magnitude > 1e-12 is real
/// positive. Throws if the input is not Hermitian or the sweep fails to
/// converge to the requested residual.
inline EigResult hermitian_eig(const Matrix& a, double tol = 1e-12, int max_sweeps = 100) {
    const int n = a.dim();
    if (n == 0) throw Error("hermitian_eig: empty matrix");
    if (a.hermiticity_residual() > 1e-10)
        throw Error("hermitian_eig: matrix is not Hermitian within 1e-10");

    Matrix b = a;
    Matrix v = Matrix::identity(n);
    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(b.at(i, i)));
    scale = std::max(scale, 1.0);

    bool converged = false;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(b.at(p, q)));
        if (off <= tol * scale) {
            converged = true;
            break;
        }

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cplx g = b.at(p, q);
                const double ag = std::abs(g);
                if (ag <= tol * scale * 1e-2) continue;
                // Phase that makes the off-diagonal entry real, then a real
                // Jacobi rotation that zeroes it.
                const cplx u = std::conj(g) / ag;
                const double app = b.at(p, p).real();
                const double aqq = b.at(q, q).real();
                const double theta = (aqq - app) / (2.0 * ag);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // J = [[c, s], [-u s, u c]] acting on columns (p, q).
                for (int r = 0; r < n; ++r) {
                    const cplx bp = b.at(r, p), bq = b.at(r, q);
                    b.at(r, p) = c * bp - u * s * bq;
                    b.at(r, q) = s * bp + u * c * bq;
                    const cplx vp = v.at(r, p), vq = v.at(r, q);
                    v.at(r, p) = c * vp - u * s * vq;
                    v.at(r, q) = s * vp + u * c * vq;
                }
                const cplx ubar = std::conj(u);
                for (int col = 0; col < n; ++col) {
                    const cplx rp = b.at(p, col), rq = b.at(q, col);
                    b.at(p, col) = c * rp - ubar * s * rq;
                    b.at(q, col) = s * rp + ubar * c * rq;
                }
                b.at(p, q) = cplx(0, 0);
                b.at(q, p) = cplx(0, 0);
                b.at(p, p) = cplx(b.at(p, p).real(), 0.0);
                b.at(q, q) = cplx(b.at(q, q).real(), 0.0);
            }
        }
    }
    if (!converged) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(b.at(p, q)));
        if (off > tol * scale) throw Error("hermitian_eig: Jacobi sweeps did not converge");
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = b.at(i, i).real();
    std::stable_sort(order.begin(), order.end(),
                     [&](int x, int y) { return diag[x] > diag[y]; });

    EigResult res;
    res.values.resize(n);
    res.vectors = Matrix(n);
    for (int j = 0; j < n; ++j) {
        const int src = order[j];
        res.values[j] = diag[src];
        // Phase convention: first non-negligible entry real positive.
        cplx phase(1.0, 0.0);
        for (int r = 0; r < n; ++r) {
            const cplx e = v.at(r, src);
            if (std::abs(e) > 1e-12) {
                phase = std::conj(e) / std::abs(e);
                break;
            }
        }
        double norm2 = 0.0;
        for (int r = 0; r < n; ++r) norm2 += std::norm(v.at(r, src));
        const double inv = 1.0 / std::sqrt(norm2);
        for (int r = 0; r < n; ++r) res.vectors.at(r, j) = v.at(r, src) * phase * inv;
    }
    return res;
}

}  // namespace qsim
