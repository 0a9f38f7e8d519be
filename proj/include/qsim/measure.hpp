// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "qsim/rng.hpp"
#include "qsim/state.hpp"

namespace qsim {

/// Projector onto basis states matching a set of per-segment constraints.
/// A constraint either pins a whole segment to a value or one qubit to a bit.
class Projector {
  public:
    static Projector segment_equals(const std::string& seg, std::uint64_t value) {
        Projector p;
        p.constraints_.push_back({seg, -1, value});
        return p;
    }

    static Projector all_zero(const std::vector<std::string>& segs) {
        Projector p;
        for (const auto& s : segs) p.constraints_.push_back({s, -1, 0});
        return p;
    }

    static Projector bit_equals(const std::string& seg, int bit, int value) {
        Projector p;
        p.constraints_.push_back({seg, bit, static_cast<std::uint64_t>(value & 1)});
        return p;
    }

    Projector& and_segment_equals(const std::string& seg, std::uint64_t value) {
        constraints_.push_back({seg, -1, value});
        return *this;
    }

    /// (mask, val): index i is in the subspace iff (i & mask) == val.
    std::pair<std::uint64_t, std::uint64_t> resolve(const RegisterLayout& layout) const {
        std::uint64_t mask = 0, val = 0;
        for (const auto& c : constraints_) {
            if (c.bit < 0) {
                if (c.value >= (std::uint64_t(1) << layout.width(c.seg)))
                    throw Error("Projector: value too wide for segment '" + c.seg + "'");
                mask |= layout.mask(c.seg);
                val |= c.value << layout.shift(c.seg);
            } else {
                const std::uint64_t b = std::uint64_t(1) << layout.bit_position(c.seg, c.bit);
                mask |= b;
                if (c.value) val |= b;
            }
        }
        return {mask, val};
    }

    /// Number of basis states in the accepted subspace.
    std::uint64_t rank(const RegisterLayout& layout) const {
        auto [mask, val] = resolve(layout);
        (void)val;
        int fixed = 0;
        for (int p = 0; p < layout.total_qubits(); ++p) fixed += (mask >> p) & 1;
        return std::uint64_t(1) << (layout.total_qubits() - fixed);
    }

    /// ||P s||^2
    double prob(const StateVector& s) const {
        auto [mask, val] = resolve(s.layout());
        double p = 0.0;
        for (std::uint64_t i = 0; i < s.dim(); ++i)
            if ((i & mask) == val) p += std::norm(s.amp(i));
        return p;
    }

    /// Renormalized projection onto the outcome branch (1 = inside subspace).
    StateVector collapse(const StateVector& s, int outcome) const {
        auto [mask, val] = resolve(s.layout());
        std::vector<cplx> amps(s.dim(), cplx(0, 0));
        double n2 = 0.0;
        for (std::uint64_t i = 0; i < s.dim(); ++i) {
            const bool in = (i & mask) == val;
            if (in == (outcome == 1)) {
                amps[i] = s.amp(i);
                n2 += std::norm(amps[i]);
            }
        }
        if (n2 < 1e-12) throw Error("Projector::collapse: branch norm below 1e-12");
        const double inv = 1.0 / std::sqrt(n2);
        for (auto& a : amps) a *= inv;
        return unchecked_state(s.layout(), std::move(amps));
    }

  private:
    struct Constraint {
        std::string seg;
        int bit;  // -1: whole segment
        std::uint64_t value;
    };
    std::vector<Constraint> constraints_;
};

struct MeasureResult {
    int outcome;        // 1: state collapsed into the subspace
    StateVector post;   // renormalized branch
    double prob;        // exact probability of the observed branch
};

/// Two-outcome projective measurement; the outcome is sampled, the reported
/// probability is exact.
inline MeasureResult measure(const Projector& p, const StateVector& s, Rng& rng) {
    const double p1 = p.prob(s);
    const int outcome = rng.uniform() < p1 ? 1 : 0;
    const double branch = outcome ? p1 : 1.0 - p1;
    if (branch < 1e-12) throw Error("measure: observed branch has probability below 1e-12");
    return MeasureResult{outcome, p.collapse(s, outcome), branch};
}

struct SegmentMeasureResult {
    std::uint64_t value;
    StateVector post;
    double prob;
};

/// Computational-basis measurement of one segment.
inline SegmentMeasureResult measure_segment(const StateVector& s, const std::string& seg,
                                            Rng& rng) {
    const auto probs = segment_marginal(s, seg);
    const double u = rng.uniform();
    double acc = 0.0;
    std::uint64_t value = probs.size() - 1;
    for (std::uint64_t v = 0; v < probs.size(); ++v) {
        acc += probs[v];
        if (u < acc) {
            value = v;
            break;
        }
    }
    if (probs[value] < 1e-12) throw Error("measure_segment: observed value has probability below 1e-12");
    return SegmentMeasureResult{value, Projector::segment_equals(seg, value).collapse(s, 1),
                                probs[value]};
}

/// Full computational-basis measurement; returns the sampled basis index.
inline std::pair<std::uint64_t, double> measure_all(const StateVector& s, Rng& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::uint64_t i = 0; i < s.dim(); ++i) {
        acc += std::norm(s.amp(i));
        if (u < acc) return {i, std::norm(s.amp(i))};
    }
    for (std::uint64_t i = s.dim(); i-- > 0;)
        if (std::norm(s.amp(i)) >= 1e-12) return {i, std::norm(s.amp(i))};
    throw Error("measure_all: no basis state with nonzero probability");
}

struct SwapTestResult {
    int accept;
    double accept_prob;
};

/// Accept probability (1 + |<a|b>|^2) / 2 computed exactly; the accept bit is
/// sampled from it.
inline SwapTestResult swap_test(const StateVector& a, const StateVector& b, Rng& rng) {
    if (a.layout() != b.layout()) throw Error("swap_test: layout mismatch");
    const double p = 0.5 * (1.0 + std::norm(a.inner(b)));
    return SwapTestResult{rng.uniform() < p ? 1 : 0, p};
}

}  // namespace qsim
