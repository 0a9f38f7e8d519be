// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "qsim/linalg.hpp"
#include "qsim/state.hpp"

namespace qsim {

/// One qubit inside a named segment; bit 0 is the segment's most significant
/// qubit.
struct QubitRef {
    std::string seg;
    int bit = 0;
};

class UnitaryOp;

namespace detail {

// Fixed-bit restriction: apply only where (index & mask) == val.
struct FixedBits {
    std::uint64_t mask = 0;
    std::uint64_t val = 0;
};

struct DenseNode {
    std::vector<QubitRef> qubits;
    Matrix mat;
};
struct OracleXorNode {
    std::string in_seg, out_seg;
    std::shared_ptr<const std::vector<std::uint64_t>> table;
    int in_bits = 0, out_bits = 0;
};
struct HadamardNode {
    std::string seg;
};
// Flips the flag qubit on basis states where every (segment, value) pattern
// entry matches.
struct CheckFlipNode {
    std::vector<std::pair<std::string, std::uint64_t>> pattern;
    std::string flag_seg;
};
struct XorConstNode {
    std::string seg;
    std::uint64_t value = 0;
};
// Block-diagonal in the key segment's basis: key value k applies members[k]
// to each listed copy segment.
struct ControlledKeyedNode {
    std::string key_seg;
    std::vector<std::string> copy_segs;
    std::shared_ptr<const std::vector<Matrix>> members;
};
struct ComposeNode {
    std::vector<UnitaryOp> parts;
};

using Node = std::variant<DenseNode, OracleXorNode, HadamardNode, CheckFlipNode, XorConstNode,
                          ControlledKeyedNode, ComposeNode>;

void apply_node(const Node& node, bool dag, const RegisterLayout& layout, std::vector<cplx>& amps,
                const FixedBits& ctrl);

}  // namespace detail

/// A unitary acting on named segments of a register layout, either dense or
/// in a structured form that is applied by index arithmetic. Values are
/// immutable; adjoint() is a cheap flag flip.
class UnitaryOp {
  public:
    UnitaryOp() : node_(std::make_shared<detail::Node>(detail::ComposeNode{})) {}

    static UnitaryOp identity() { return UnitaryOp(); }

    /// Dense matrix on whole segments, listed most-significant first.
    static UnitaryOp dense(const std::vector<std::string>& segs, Matrix mat,
                           bool check_unitarity = true) {
        detail::DenseNode node;
        for (const auto& s : segs) node.qubits.push_back(QubitRef{s, -1});  // -1: whole segment
        if (check_unitarity && !mat.is_unitary(1e-10))
            throw Error("UnitaryOp::dense: body is not unitary within 1e-10");
        node.mat = std::move(mat);
        return UnitaryOp(std::move(node));
    }

    /// Dense matrix on individual qubits.
    static UnitaryOp dense_on_qubits(std::vector<QubitRef> qubits, Matrix mat,
                                     bool check_unitarity = true) {
        if (check_unitarity && !mat.is_unitary(1e-10))
            throw Error("UnitaryOp::dense_on_qubits: body is not unitary within 1e-10");
        return UnitaryOp(detail::DenseNode{std::move(qubits), std::move(mat)});
    }

    /// |x>|y> -> |x>|y xor f(x)> with f given as a full table.
    static UnitaryOp oracle_xor(const std::string& in_seg, const std::string& out_seg,
                                std::vector<std::uint64_t> table, int out_bits) {
        int in_bits = 0;
        while ((std::uint64_t(1) << in_bits) < table.size()) ++in_bits;
        if ((std::uint64_t(1) << in_bits) != table.size())
            throw Error("UnitaryOp::oracle_xor: table size must be a power of two");
        for (auto v : table)
            if (v >= (std::uint64_t(1) << out_bits))
                throw Error("UnitaryOp::oracle_xor: table entry exceeds out_bits");
        return UnitaryOp(detail::OracleXorNode{
            in_seg, out_seg, std::make_shared<const std::vector<std::uint64_t>>(std::move(table)),
            in_bits, out_bits});
    }

    /// Hadamard on every qubit of a segment.
    static UnitaryOp hadamard_layer(const std::string& seg) {
        return UnitaryOp(detail::HadamardNode{seg});
    }

    /// Flip `flag_seg` (width 1) on basis states matching all pattern entries.
    static UnitaryOp check_flip(std::vector<std::pair<std::string, std::uint64_t>> pattern,
                                const std::string& flag_seg) {
        return UnitaryOp(detail::CheckFlipNode{std::move(pattern), flag_seg});
    }

    /// X-gate pattern: index -> index xor (value at segment position).
    static UnitaryOp xor_constant(const std::string& seg, std::uint64_t value) {
        return UnitaryOp(detail::XorConstNode{seg, value});
    }

    /// Key value k applies members[k] on each copy segment.
    static UnitaryOp controlled_keyed(const std::string& key_seg,
                                      std::vector<std::string> copy_segs,
                                      std::shared_ptr<const std::vector<Matrix>> members) {
        if (!members || members->empty())
            throw Error("UnitaryOp::controlled_keyed: empty member list");
        return UnitaryOp(
            detail::ControlledKeyedNode{key_seg, std::move(copy_segs), std::move(members)});
    }

    static UnitaryOp compose(std::vector<UnitaryOp> parts) {
        return UnitaryOp(detail::ComposeNode{std::move(parts)});
    }

    UnitaryOp adjoint() const {
        UnitaryOp u = *this;
        u.dagger_ = !u.dagger_;
        return u;
    }

    StateVector apply(const StateVector& s) const {
        std::vector<cplx> amps = s.amps();
        detail::apply_node(*node_, dagger_, s.layout(), amps, detail::FixedBits{});
        return unchecked_state(s.layout(), std::move(amps));
    }

    /// Dense materialization over the full layout (tests and small checks).
    Matrix materialize(const RegisterLayout& layout) const {
        if (layout.total_qubits() > 12)
            throw BudgetError("UnitaryOp::materialize: layout exceeds 12 qubits");
        const std::uint64_t d = layout.dim();
        Matrix m(static_cast<int>(d));
        for (std::uint64_t col = 0; col < d; ++col) {
            std::vector<cplx> amps(d, cplx(0, 0));
            amps[col] = 1.0;
            detail::apply_node(*node_, dagger_, layout, amps, detail::FixedBits{});
            for (std::uint64_t row = 0; row < d; ++row) m.at(static_cast<int>(row),
                                                             static_cast<int>(col)) = amps[row];
        }
        return m;
    }

    const detail::Node& node() const { return *node_; }
    bool is_adjoint() const { return dagger_; }

  private:
    explicit UnitaryOp(detail::Node node)
        : node_(std::make_shared<detail::Node>(std::move(node))) {}

    std::shared_ptr<const detail::Node> node_;
    bool dagger_ = false;
};

inline StateVector apply(const UnitaryOp& u, const StateVector& s) { return u.apply(s); }

namespace detail {

inline void apply_op(const UnitaryOp& op, bool outer_dag, const RegisterLayout& layout,
                     std::vector<cplx>& amps, const FixedBits& ctrl) {
    apply_node(op.node(), outer_dag != op.is_adjoint(), layout, amps, ctrl);
}

/// In-place application used by engines that iterate many gates.
inline void apply_inplace(const UnitaryOp& op, const RegisterLayout& layout,
                          std::vector<cplx>& amps) {
    apply_op(op, false, layout, amps, FixedBits{});
}

// Resolve a QubitRef list against a layout into index bit positions.
inline std::vector<int> resolve_qubits(const std::vector<QubitRef>& refs,
                                       const RegisterLayout& layout) {
    std::vector<int> pos;
    for (const auto& r : refs) {
        if (r.bit == -1) {
            const int w = layout.width(r.seg);
            for (int b = 0; b < w; ++b) pos.push_back(layout.bit_position(r.seg, b));
        } else {
            pos.push_back(layout.bit_position(r.seg, r.bit));
        }
    }
    return pos;
}

inline void apply_dense(std::vector<cplx>& amps, const RegisterLayout& layout,
                        const std::vector<int>& bitpos, const Matrix& mat, bool dag,
                        const FixedBits& ctrl) {
    const int k = static_cast<int>(bitpos.size());
    if (k > 12) throw BudgetError("dense apply: more than 12 target qubits");
    const std::uint64_t subdim = std::uint64_t(1) << k;
    if (static_cast<std::uint64_t>(mat.dim()) != subdim)
        throw Error("dense apply: matrix dimension does not match target qubits");
    const int total = layout.total_qubits();

    std::uint64_t tmask = 0;
    for (int p : bitpos) {
        const std::uint64_t bit = std::uint64_t(1) << p;
        if (tmask & bit) throw Error("dense apply: duplicate target qubit");
        tmask |= bit;
    }
    if (tmask & ctrl.mask) throw Error("dense apply: control overlaps target");

    // spread[l]: local index l scattered to the target bit positions.
    std::vector<std::uint64_t> spread(subdim, 0);
    for (std::uint64_t l = 0; l < subdim; ++l) {
        std::uint64_t s = 0;
        for (int j = 0; j < k; ++j)
            if ((l >> (k - 1 - j)) & 1) s |= std::uint64_t(1) << bitpos[j];
        spread[l] = s;
    }

    // Enumerate the free (non-target, non-control) bits.
    std::vector<int> fixed;
    for (int p = 0; p < total; ++p)
        if ((tmask >> p) & 1 || (ctrl.mask >> p) & 1) fixed.push_back(p);
    const int nfree = total - static_cast<int>(fixed.size());

    std::vector<cplx> in(subdim), out(subdim);
    for (std::uint64_t c = 0; c < (std::uint64_t(1) << nfree); ++c) {
        std::uint64_t base = c;
        for (int p : fixed) {  // ascending; insert a zero bit at each fixed position
            const std::uint64_t low = base & ((std::uint64_t(1) << p) - 1);
            base = ((base >> p) << (p + 1)) | low;
        }
        base |= ctrl.val;
        for (std::uint64_t l = 0; l < subdim; ++l) in[l] = amps[base | spread[l]];
        for (std::uint64_t r = 0; r < subdim; ++r) {
            cplx acc(0, 0);
            if (!dag) {
                for (std::uint64_t cc = 0; cc < subdim; ++cc)
                    acc += mat.at(static_cast<int>(r), static_cast<int>(cc)) * in[cc];
            } else {
                for (std::uint64_t cc = 0; cc < subdim; ++cc)
                    acc += std::conj(mat.at(static_cast<int>(cc), static_cast<int>(r))) * in[cc];
            }
            out[r] = acc;
        }
        for (std::uint64_t l = 0; l < subdim; ++l) amps[base | spread[l]] = out[l];
    }
}

inline void apply_node(const Node& node, bool dag, const RegisterLayout& layout,
                       std::vector<cplx>& amps, const FixedBits& ctrl) {
    const std::uint64_t dim = layout.dim();

    if (const auto* d = std::get_if<DenseNode>(&node)) {
        apply_dense(amps, layout, resolve_qubits(d->qubits, layout), d->mat, dag, ctrl);

    } else if (const auto* o = std::get_if<OracleXorNode>(&node)) {
        if (layout.width(o->in_seg) != o->in_bits)
            throw Error("oracle apply: input segment width mismatch");
        if (layout.width(o->out_seg) != o->out_bits)
            throw Error("oracle apply: output segment width mismatch");
        const int in_sh = layout.shift(o->in_seg);
        const int out_sh = layout.shift(o->out_seg);
        const std::uint64_t in_m = (std::uint64_t(1) << o->in_bits) - 1;
        const auto& table = *o->table;
        std::vector<cplx> next(dim);
        for (std::uint64_t i = 0; i < dim; ++i) {
            if ((i & ctrl.mask) != ctrl.val) {
                next[i] = amps[i];
                continue;
            }
            const std::uint64_t x = (i >> in_sh) & in_m;
            next[i ^ (table[x] << out_sh)] = amps[i];
        }
        amps.swap(next);

    } else if (const auto* h = std::get_if<HadamardNode>(&node)) {
        const int w = layout.width(h->seg);
        const double inv_sqrt2 = 0.7071067811865475244;
        for (int b = 0; b < w; ++b) {
            const std::uint64_t bit = std::uint64_t(1) << layout.bit_position(h->seg, b);
            for (std::uint64_t i = 0; i < dim; ++i) {
                if (i & bit) continue;
                if ((i & ctrl.mask) != ctrl.val) continue;
                const cplx a0 = amps[i], a1 = amps[i | bit];
                amps[i] = (a0 + a1) * inv_sqrt2;
                amps[i | bit] = (a0 - a1) * inv_sqrt2;
            }
        }

    } else if (const auto* cf = std::get_if<CheckFlipNode>(&node)) {
        if (layout.width(cf->flag_seg) != 1) throw Error("check_flip: flag segment must be 1 qubit");
        std::uint64_t pmask = ctrl.mask, pval = ctrl.val;
        for (const auto& [seg, val] : cf->pattern) {
            if (val >= (std::uint64_t(1) << layout.width(seg)))
                throw Error("check_flip: pattern value too wide for segment '" + seg + "'");
            pmask |= layout.mask(seg);
            pval |= val << layout.shift(seg);
        }
        const std::uint64_t fbit = layout.mask(cf->flag_seg);
        if (pmask & fbit) throw Error("check_flip: pattern includes the flag segment");
        for (std::uint64_t i = 0; i < dim; ++i) {
            if (i & fbit) continue;
            if ((i & pmask) != pval) continue;
            std::swap(amps[i], amps[i | fbit]);
        }

    } else if (const auto* x = std::get_if<XorConstNode>(&node)) {
        if (x->value >= (std::uint64_t(1) << layout.width(x->seg)))
            throw Error("xor_constant: value too wide for segment '" + x->seg + "'");
        const std::uint64_t xo = x->value << layout.shift(x->seg);
        if (xo == 0) return;
        std::vector<cplx> next(dim);
        for (std::uint64_t i = 0; i < dim; ++i) {
            if ((i & ctrl.mask) != ctrl.val)
                next[i] = amps[i];
            else
                next[i ^ xo] = amps[i];
        }
        amps.swap(next);

    } else if (const auto* ck = std::get_if<ControlledKeyedNode>(&node)) {
        const int kw = layout.width(ck->key_seg);
        const std::uint64_t nkeys = std::uint64_t(1) << kw;
        if (ck->members->size() != nkeys)
            throw Error("controlled_keyed: member count must equal 2^key_width");
        const int ksh = layout.shift(ck->key_seg);
        const std::uint64_t kmask = layout.mask(ck->key_seg);
        if (kmask & ctrl.mask) throw Error("controlled_keyed: key segment already controlled");
        for (std::uint64_t key = 0; key < nkeys; ++key) {
            FixedBits sub{ctrl.mask | kmask, ctrl.val | (key << ksh)};
            for (const auto& seg : ck->copy_segs) {
                std::vector<int> pos;
                const int w = layout.width(seg);
                for (int b = 0; b < w; ++b) pos.push_back(layout.bit_position(seg, b));
                apply_dense(amps, layout, pos, (*ck->members)[key], dag, sub);
            }
        }

    } else if (const auto* cp = std::get_if<ComposeNode>(&node)) {
        if (!dag) {
            for (const auto& part : cp->parts) apply_op(part, false, layout, amps, ctrl);
        } else {
            for (auto it = cp->parts.rbegin(); it != cp->parts.rend(); ++it)
                apply_op(*it, true, layout, amps, ctrl);
        }
    }
}

}  // namespace detail

}  // namespace qsim
