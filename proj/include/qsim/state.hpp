// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "qsim/layout.hpp"

namespace qsim {

/// Normalized pure state over a register layout. Immutable in the public API;
/// operations return new values.
class StateVector {
  public:
    StateVector(RegisterLayout layout, std::vector<cplx> amps)
        : layout_(std::move(layout)), amps_(std::move(amps)) {
        if (amps_.size() != layout_.dim())
            throw Error("StateVector: amplitude count does not match layout dimension");
        const double n = norm();
        if (std::abs(n - 1.0) > 1e-10)
            throw Error("StateVector: not normalized (norm = " + std::to_string(n) + ")");
    }

    static StateVector zero(const RegisterLayout& layout) { return basis(layout, 0); }

    static StateVector basis(const RegisterLayout& layout, std::uint64_t index) {
        if (index >= layout.dim()) throw Error("StateVector::basis: index out of range");
        std::vector<cplx> amps(layout.dim(), cplx(0, 0));
        amps[index] = 1.0;
        return StateVector(layout, std::move(amps));
    }

    /// Basis state from per-segment values, in layout order.
    static StateVector basis(const RegisterLayout& layout,
                             const std::vector<std::uint64_t>& segment_values) {
        const auto& segs = layout.segments();
        if (segment_values.size() != segs.size())
            throw Error("StateVector::basis: one value per segment required");
        std::uint64_t index = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            if (segment_values[i] >= (std::uint64_t(1) << segs[i].width))
                throw Error("StateVector::basis: value too wide for segment '" + segs[i].name +
                            "'");
            index |= segment_values[i] << layout.shift(segs[i].name);
        }
        return basis(layout, index);
    }

    const RegisterLayout& layout() const { return layout_; }
    const std::vector<cplx>& amps() const { return amps_; }
    cplx amp(std::uint64_t i) const { return amps_[i]; }
    std::uint64_t dim() const { return amps_.size(); }

    double norm() const {
        double s = 0.0;
        for (const auto& a : amps_) s += std::norm(a);
        return std::sqrt(s);
    }

    cplx inner(const StateVector& rhs) const {
        if (layout_ != rhs.layout_) throw Error("StateVector::inner: layout mismatch");
        cplx s(0, 0);
        for (std::size_t i = 0; i < amps_.size(); ++i) s += std::conj(amps_[i]) * rhs.amps_[i];
        return s;
    }

  private:
    RegisterLayout layout_;
    std::vector<cplx> amps_;

    friend StateVector unchecked_state(RegisterLayout, std::vector<cplx>);
    StateVector(RegisterLayout layout, std::vector<cplx> amps, int)
        : layout_(std::move(layout)), amps_(std::move(amps)) {}
};

namespace detail {
inline void normalize(std::vector<cplx>& amps) {
    double s = 0.0;
    for (const auto& a : amps) s += std::norm(a);
    if (s <= 0.0) throw Error("normalize: zero vector");
    const double inv = 1.0 / std::sqrt(s);
    for (auto& a : amps) a *= inv;
}
}  // namespace detail

/// Internal constructor bypassing the normalization check; callers must
/// guarantee the invariant themselves.
inline StateVector unchecked_state(RegisterLayout layout, std::vector<cplx> amps) {
    return StateVector(std::move(layout), std::move(amps), 0);
}

/// |<a|b>|^2 for pure states; insensitive to global phase.
inline double fidelity(const StateVector& a, const StateVector& b) {
    const double f = std::norm(a.inner(b));
    return f;
}

/// Tensor product; rhs segments become the low bits.
inline StateVector tensor(const StateVector& a, const StateVector& b) {
    std::vector<Segment> segs = a.layout().segments();
    for (const auto& s : b.layout().segments()) segs.push_back(s);
    RegisterLayout layout(segs);
    std::vector<cplx> amps(layout.dim());
    const std::uint64_t db = b.dim();
    for (std::uint64_t i = 0; i < a.dim(); ++i)
        for (std::uint64_t j = 0; j < db; ++j) amps[(i * db) | j] = a.amp(i) * b.amp(j);
    return unchecked_state(std::move(layout), std::move(amps));
}

/// Embed a state into a larger layout whose leading segments equal the
/// state's layout; the trailing segments are set to |0...0>.
inline StateVector embed_prefix(const StateVector& s, const RegisterLayout& full) {
    const auto& inner_segs = s.layout().segments();
    const auto& full_segs = full.segments();
    if (inner_segs.size() > full_segs.size())
        throw Error("embed_prefix: target layout smaller than state layout");
    for (std::size_t i = 0; i < inner_segs.size(); ++i)
        if (full_segs[i].name != inner_segs[i].name || full_segs[i].width != inner_segs[i].width)
            throw Error("embed_prefix: state layout is not a prefix of target layout");
    const int pad = full.total_qubits() - s.layout().total_qubits();
    std::vector<cplx> amps(full.dim(), cplx(0, 0));
    for (std::uint64_t i = 0; i < s.dim(); ++i) amps[i << pad] = s.amp(i);
    return unchecked_state(full, std::move(amps));
}

/// Probability distribution over one segment's basis values.
inline std::vector<double> segment_marginal(const StateVector& s, const std::string& seg) {
    const auto& layout = s.layout();
    const int w = layout.width(seg);
    const int sh = layout.shift(seg);
    const std::uint64_t m = (std::uint64_t(1) << w) - 1;
    std::vector<double> probs(std::uint64_t(1) << w, 0.0);
    for (std::uint64_t i = 0; i < s.dim(); ++i) probs[(i >> sh) & m] += std::norm(s.amp(i));
    return probs;
}

}  // namespace qsim
