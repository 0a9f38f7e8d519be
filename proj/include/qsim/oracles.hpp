// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "qsim/haar.hpp"
#include "qsim/measure.hpp"
#include "qsim/rng.hpp"
#include "qsim/unitary.hpp"

namespace qsim {

/// Classical function {0,1}^in -> {0,1}^out as a full truth table.
class ClassicalFunction {
  public:
    ClassicalFunction(int in_bits, int out_bits, std::vector<std::uint64_t> table)
        : in_bits_(in_bits), out_bits_(out_bits), table_(std::move(table)) {
        if (in_bits_ < 0 || in_bits_ > 20) throw BudgetError("ClassicalFunction: in_bits out of [0, 20]");
        if (out_bits_ < 1 || out_bits_ > 63) throw Error("ClassicalFunction: out_bits out of [1, 63]");
        if (table_.size() != (std::uint64_t(1) << in_bits_))
            throw Error("ClassicalFunction: table size must be 2^in_bits");
        for (auto v : table_)
            if (v >= (std::uint64_t(1) << out_bits_))
                throw Error("ClassicalFunction: table entry exceeds out_bits");
    }

    int in_bits() const { return in_bits_; }
    int out_bits() const { return out_bits_; }
    std::uint64_t eval(std::uint64_t x) const {
        if (x >= table_.size()) throw Error("ClassicalFunction::eval: input out of domain");
        return table_[x];
    }
    const std::vector<std::uint64_t>& table() const { return table_; }

    bool operator==(const ClassicalFunction& rhs) const {
        return in_bits_ == rhs.in_bits_ && out_bits_ == rhs.out_bits_ && table_ == rhs.table_;
    }

    /// Text serialization: "in out" header, then one hex row per input.
    std::string to_hex() const {
        std::ostringstream os;
        os << in_bits_ << " " << out_bits_ << "\n" << std::hex;
        for (auto v : table_) os << v << "\n";
        return os.str();
    }

    static ClassicalFunction from_hex(const std::string& text) {
        std::istringstream is(text);
        int in_bits = -1, out_bits = -1;
        is >> in_bits >> out_bits;
        if (!is) throw Error("ClassicalFunction::from_hex: bad header");
        std::vector<std::uint64_t> table;
        is >> std::hex;
        std::uint64_t v;
        while (is >> v) table.push_back(v);
        return ClassicalFunction(in_bits, out_bits, std::move(table));
    }

  private:
    int in_bits_, out_bits_;
    std::vector<std::uint64_t> table_;
};

/// Truly random function: i.i.d. uniform table entries.
inline ClassicalFunction sample_random_function(int in_bits, int out_bits, Rng& rng) {
    if (in_bits > 20) throw BudgetError("sample_random_function: domain larger than 2^20");
    std::vector<std::uint64_t> table(std::uint64_t(1) << in_bits);
    for (auto& v : table) v = rng.bits(out_bits);
    return ClassicalFunction(in_bits, out_bits, std::move(table));
}

/// Toy keyed function family: each key seeds a deterministic generator that
/// fills the table. Not cryptographic; experiments probe correctness and
/// attack mechanics, not hardness.
class PrfFamily {
  public:
    PrfFamily(int key_bits, int in_bits, int out_bits, std::uint64_t master_seed)
        : key_bits_(key_bits), in_bits_(in_bits), out_bits_(out_bits), master_seed_(master_seed),
          explicit_tables_(nullptr) {
        if (key_bits_ < 1 || key_bits_ > 6) throw BudgetError("PrfFamily: key_bits out of [1, 6]");
        if (in_bits_ > 20) throw BudgetError("PrfFamily: in_bits above 20");
    }

    /// Family given by explicit tables (engineered collisions, injective
    /// families, and similar test fixtures).
    static PrfFamily from_tables(std::vector<ClassicalFunction> tables) {
        if (tables.empty()) throw Error("PrfFamily::from_tables: no tables");
        int key_bits = 0;
        while ((std::size_t(1) << key_bits) < tables.size()) ++key_bits;
        if ((std::size_t(1) << key_bits) != tables.size())
            throw Error("PrfFamily::from_tables: table count must be a power of two");
        key_bits = std::max(key_bits, 1);
        PrfFamily fam(key_bits, tables[0].in_bits(), tables[0].out_bits(), 0);
        for (const auto& t : tables)
            if (t.in_bits() != fam.in_bits_ || t.out_bits() != fam.out_bits_)
                throw Error("PrfFamily::from_tables: inconsistent table shapes");
        fam.explicit_tables_ =
            std::make_shared<const std::vector<ClassicalFunction>>(std::move(tables));
        return fam;
    }

    int key_bits() const { return key_bits_; }
    int in_bits() const { return in_bits_; }
    int out_bits() const { return out_bits_; }
    std::uint64_t key_count() const { return std::uint64_t(1) << key_bits_; }
    std::uint64_t master_seed() const { return master_seed_; }

    ClassicalFunction derive(std::uint64_t key) const {
        if (key >= key_count()) throw Error("PrfFamily::derive: key out of range");
        if (explicit_tables_) return (*explicit_tables_)[key];
        Rng rng = Rng::substream(master_seed_ ^ 0x70726600ULL, key);
        return sample_random_function(in_bits_, out_bits_, rng);
    }

    std::uint64_t eval(std::uint64_t key, std::uint64_t x) const { return derive(key).eval(x); }

  private:
    int key_bits_, in_bits_, out_bits_;
    std::uint64_t master_seed_;
    std::shared_ptr<const std::vector<ClassicalFunction>> explicit_tables_;
};

/// Default toy family with the standard 3-lambda output length.
inline PrfFamily toy_prf(int lambda, int ell_out, std::uint64_t master_seed) {
    if (lambda < 1 || lambda > 6) throw BudgetError("toy_prf: lambda out of [1, 6]");
    return PrfFamily(lambda, lambda, ell_out, master_seed);
}
inline PrfFamily toy_prf(int lambda, std::uint64_t master_seed) {
    return toy_prf(lambda, 3 * lambda, master_seed);
}

/// |x>|y> -> |x>|y xor f(x)> on the named segments.
inline UnitaryOp lift_to_oracle(const ClassicalFunction& f, const std::string& in_seg = "x",
                                const std::string& out_seg = "y") {
    if (f.in_bits() + f.out_bits() > max_qubits())
        throw BudgetError("lift_to_oracle: oracle exceeds qubit budget");
    return UnitaryOp::oracle_xor(in_seg, out_seg, f.table(), f.out_bits());
}

/// Keyed family of n-qubit unitaries, held as dense members. The family's
/// states are |psi_k> = U_k |0>.
class KeyedUnitaryFamily {
  public:
    KeyedUnitaryFamily(int key_bits, int n, std::vector<Matrix> members)
        : key_bits_(key_bits), n_(n) {
        if (key_bits_ < 1 || key_bits_ > 6)
            throw BudgetError("KeyedUnitaryFamily: key_bits out of [1, 6]");
        if (n_ < 1 || n_ > 10) throw BudgetError("KeyedUnitaryFamily: state qubits out of [1, 10]");
        if (members.size() != key_count())
            throw Error("KeyedUnitaryFamily: need exactly 2^key_bits members");
        for (const auto& m : members) {
            if (m.dim() != (1 << n_)) throw Error("KeyedUnitaryFamily: member dimension mismatch");
            if (!m.is_unitary(1e-10)) throw Error("KeyedUnitaryFamily: member not unitary");
        }
        members_ = std::make_shared<const std::vector<Matrix>>(std::move(members));
    }

    /// Independently Haar-sampled member per key under a master seed.
    static KeyedUnitaryFamily haar(int key_bits, int n, std::uint64_t master_seed) {
        std::vector<Matrix> members;
        members.reserve(std::size_t(1) << key_bits);
        for (std::uint64_t k = 0; k < (std::uint64_t(1) << key_bits); ++k) {
            Rng rng = Rng::substream(master_seed ^ 0x68616172ULL, k);
            members.push_back(haar_unitary_matrix(n, rng));
        }
        return KeyedUnitaryFamily(key_bits, n, std::move(members));
    }

    /// Every key maps to the same unitary.
    static KeyedUnitaryFamily identical(int key_bits, const Matrix& u) {
        int n = 0;
        while ((1 << n) < u.dim()) ++n;
        return KeyedUnitaryFamily(key_bits, n,
                                  std::vector<Matrix>(std::size_t(1) << key_bits, u));
    }

    /// Members prepare sum_x |x, f_k(x)> from |0>: a Hadamard layer on the
    /// input half followed by the lifted oracle.
    static KeyedUnitaryFamily pk_preparation(const PrfFamily& prf) {
        const int n = prf.in_bits() + prf.out_bits();
        if (n > 10) throw BudgetError("pk_preparation: member would exceed 10 qubits");
        RegisterLayout local{{"x", prf.in_bits()}, {"y", prf.out_bits()}};
        std::vector<Matrix> members;
        members.reserve(prf.key_count());
        for (std::uint64_t k = 0; k < prf.key_count(); ++k) {
            const UnitaryOp prep = UnitaryOp::compose(
                {UnitaryOp::hadamard_layer("x"), lift_to_oracle(prf.derive(k), "x", "y")});
            members.push_back(prep.materialize(local));
        }
        return KeyedUnitaryFamily(prf.key_bits(), n, std::move(members));
    }

    int key_bits() const { return key_bits_; }
    int state_qubits() const { return n_; }
    std::uint64_t key_count() const { return std::uint64_t(1) << key_bits_; }
    const Matrix& member(std::uint64_t key) const {
        if (key >= key_count()) throw Error("KeyedUnitaryFamily::member: key out of range");
        return (*members_)[key];
    }
    std::shared_ptr<const std::vector<Matrix>> members() const { return members_; }

    /// U_k |0...0> on the single-copy layout {"psi", n}.
    StateVector member_state(std::uint64_t key) const {
        const Matrix& u = member(key);
        std::vector<cplx> amps(std::uint64_t(1) << n_);
        for (int r = 0; r < u.dim(); ++r) amps[r] = u.at(r, 0);
        detail::normalize(amps);
        return unchecked_state(RegisterLayout{{"psi", n_}}, std::move(amps));
    }

    /// Block-diagonal op applying U_k (or its adjoint, via .adjoint()) to each
    /// copy segment when the key segment holds k.
    UnitaryOp controlled(const std::string& key_seg,
                         const std::vector<std::string>& copy_segs) const {
        return UnitaryOp::controlled_keyed(key_seg, copy_segs, members_);
    }

  private:
    int key_bits_, n_;
    std::shared_ptr<const std::vector<Matrix>> members_;
};

/// Controlled adjoint application across m copies on the canonical attack
/// segments prs0..prs{m-1} with key segment "sk".
inline UnitaryOp controlled_keyed_adjoint(const KeyedUnitaryFamily& fam, int m) {
    if (m < 1) throw Error("controlled_keyed_adjoint: need at least one copy");
    if (m * fam.state_qubits() + fam.key_bits() > max_qubits())
        throw BudgetError("controlled_keyed_adjoint: exceeds qubit budget");
    std::vector<std::string> copies;
    for (int i = 0; i < m; ++i) copies.push_back("prs" + std::to_string(i));
    return fam.controlled("sk", copies).adjoint();
}

}  // namespace qsim
