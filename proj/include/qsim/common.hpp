// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <complex>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace qsim {

using cplx = std::complex<double>;

/// Base error for contract violations and numeric failures.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A register or operator would exceed the configured qubit budget.
class BudgetError : public Error {
  public:
    explicit BudgetError(const std::string& what) : Error(what) {}
};

/// Maximum total qubits per register layout (default 24, env QSIM_MAX_QUBITS).
inline int max_qubits() {
    static const int cached = [] {
        if (const char* env = std::getenv("QSIM_MAX_QUBITS")) {
            int v = std::atoi(env);
            if (v >= 1 && v <= 30) return v;
        }
        return 24;
    }();
    return cached;
}

}  // namespace qsim
