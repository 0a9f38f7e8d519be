// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsim/linalg.hpp"
#include "qsim/measure.hpp"
#include "qsim/stats.hpp"
#include "qsim/unitary.hpp"

namespace qsim::rewind {

/// A unitary on system (+) ancilla registers with a designated success
/// projector on a flag qubit. The ancilla (which includes the flag) starts in
/// |0...0>. `probe` is an orthonormal set spanning the system subspace of
/// interest; when empty, the full computational basis of the system is used.
struct AmplifierInstance {
    RegisterLayout layout;                  // system segments first, then ancilla segments
    std::vector<std::string> system_segs;
    std::vector<std::string> ancilla_segs;
    UnitaryOp u;
    Projector flag;                         // success projector, e.g. out == 1
    std::vector<StateVector> probe;         // states on the system-only layout

    RegisterLayout system_layout() const {
        std::vector<Segment> segs;
        for (const auto& name : system_segs)
            segs.push_back(Segment{name, layout.width(name)});
        return RegisterLayout(segs);
    }

    int ancilla_bits() const {
        int l = 0;
        for (const auto& name : ancilla_segs) l += layout.width(name);
        return l;
    }
};

namespace detail_rw {

inline void check_instance(const AmplifierInstance& inst) {
    const auto& segs = inst.layout.segments();
    if (inst.system_segs.size() + inst.ancilla_segs.size() != segs.size())
        throw Error("AmplifierInstance: every segment must be system or ancilla");
    for (std::size_t i = 0; i < inst.system_segs.size(); ++i)
        if (segs[i].name != inst.system_segs[i])
            throw Error("AmplifierInstance: system segments must be a layout prefix");
    for (std::size_t i = 0; i < inst.ancilla_segs.size(); ++i)
        if (segs[inst.system_segs.size() + i].name != inst.ancilla_segs[i])
            throw Error("AmplifierInstance: ancilla segments out of order");
}

inline std::vector<StateVector> probe_or_basis(const AmplifierInstance& inst) {
    if (!inst.probe.empty()) return inst.probe;
    const RegisterLayout sys = inst.system_layout();
    if (sys.total_qubits() > 10)
        throw BudgetError("AmplifierInstance: full-basis probe above 2^10 dimensions");
    std::vector<StateVector> basis;
    basis.reserve(sys.dim());
    for (std::uint64_t i = 0; i < sys.dim(); ++i) basis.push_back(StateVector::basis(sys, i));
    return basis;
}

// Raw flag projection of U (probe_j (x) |0_anc>), without normalization.
inline std::vector<cplx> flagged_image(const AmplifierInstance& inst, const StateVector& sys_state) {
    StateVector s = embed_prefix(sys_state, inst.layout);
    std::vector<cplx> amps = s.amps();
    qsim::detail::apply_inplace(inst.u, inst.layout, amps);
    auto [mask, val] = inst.flag.resolve(inst.layout);
    for (std::uint64_t i = 0; i < amps.size(); ++i)
        if ((i & mask) != val) amps[i] = cplx(0, 0);
    return amps;
}

}  // namespace detail_rw

/// Success operator P = (I (x) <0|) U^dag Pi1 U (I (x) |0>) restricted to the
/// probe set: P_ab = <w_a | w_b> with w_x = Pi1 U (probe_x (x) |0>). Hermitian
/// and positive semidefinite by construction; eigenvalues lie in [0, 1].
inline Matrix build_P(const AmplifierInstance& inst) {
    detail_rw::check_instance(inst);
    const auto probe = detail_rw::probe_or_basis(inst);
    const int k = static_cast<int>(probe.size());
    if (k > 1024) throw BudgetError("build_P: probe dimension above 2^10");
    std::vector<std::vector<cplx>> w;
    w.reserve(k);
    for (const auto& ps : probe) w.push_back(detail_rw::flagged_image(inst, ps));
    Matrix p(k);
    for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) {
            cplx acc(0, 0);
            for (std::size_t i = 0; i < w[a].size(); ++i) acc += std::conj(w[a][i]) * w[b][i];
            p.at(a, b) = acc;
        }
    return p;
}

/// Eigenvectors of the success operator with their flag branches. For
/// eigenvalue p strictly inside (0, 1):
///   U (psi_i (x) |0>) = sqrt(p) |branch1> + sqrt(1-p) |branch0>,
/// and the branch collection is orthonormal. Eigenvalues at 0 or 1 leave one
/// branch undefined; those entries are flagged degenerate.
struct SpectralDecomposition {
    std::vector<double> eigenvalues;             // descending
    std::vector<StateVector> eigenvectors;       // on the system layout
    std::vector<std::optional<StateVector>> branch0;  // on the full layout
    std::vector<std::optional<StateVector>> branch1;
    std::vector<bool> degenerate;
};

inline SpectralDecomposition eigen_decompose(const AmplifierInstance& inst, const Matrix& p,
                                             double residual_tol = 1e-8) {
    detail_rw::check_instance(inst);
    if (p.hermiticity_residual() > 1e-10)
        throw Error("eigen_decompose: success operator is not Hermitian within 1e-10");
    const auto probe = detail_rw::probe_or_basis(inst);
    if (static_cast<int>(probe.size()) != p.dim())
        throw Error("eigen_decompose: operator dimension does not match probe");
    const EigResult eig = hermitian_eig(p);

    // Residual check: ||P c - lambda c|| per eigenpair.
    for (int j = 0; j < p.dim(); ++j) {
        std::vector<cplx> c(p.dim());
        for (int r = 0; r < p.dim(); ++r) c[r] = eig.vectors.at(r, j);
        const auto pc = p.mul(c);
        double r2 = 0.0;
        for (int r = 0; r < p.dim(); ++r) r2 += std::norm(pc[r] - eig.values[j] * c[r]);
        if (std::sqrt(r2) > residual_tol)
            throw Error("eigen_decompose: eigenpair residual above tolerance");
        if (eig.values[j] < -1e-10 || eig.values[j] > 1.0 + 1e-10)
            throw Error("eigen_decompose: eigenvalue outside [0, 1]");
    }

    SpectralDecomposition out;
    const RegisterLayout sys = inst.system_layout();
    for (int j = 0; j < p.dim(); ++j) {
        const double pj = std::min(std::max(eig.values[j], 0.0), 1.0);
        out.eigenvalues.push_back(pj);

        std::vector<cplx> amps(sys.dim(), cplx(0, 0));
        for (int r = 0; r < p.dim(); ++r) {
            const cplx coeff = eig.vectors.at(r, j);
            const auto& pr = probe[static_cast<std::size_t>(r)].amps();
            for (std::uint64_t i = 0; i < pr.size(); ++i) amps[i] += coeff * pr[i];
        }
        qsim::detail::normalize(amps);
        // Phase convention: first non-negligible amplitude real positive.
        cplx phase(1.0, 0.0);
        for (const auto& a : amps)
            if (std::abs(a) > 1e-12) {
                phase = std::conj(a) / std::abs(a);
                break;
            }
        for (auto& a : amps) a *= phase;
        StateVector psi = unchecked_state(sys, std::move(amps));
        out.eigenvectors.push_back(psi);

        const bool deg = pj < 1e-9 || pj > 1.0 - 1e-9;
        out.degenerate.push_back(deg);
        StateVector full = embed_prefix(psi, inst.layout);
        full = inst.u.apply(full);
        if (deg) {
            out.branch0.push_back(std::nullopt);
            out.branch1.push_back(std::nullopt);
            continue;
        }
        auto [mask, val] = inst.flag.resolve(inst.layout);
        std::vector<cplx> b0(full.dim()), b1(full.dim());
        for (std::uint64_t i = 0; i < full.dim(); ++i) {
            if ((i & mask) == val)
                b1[i] = full.amp(i);
            else
                b0[i] = full.amp(i);
        }
        const double s1 = 1.0 / std::sqrt(pj), s0 = 1.0 / std::sqrt(1.0 - pj);
        for (auto& a : b1) a *= s1;
        for (auto& a : b0) a *= s0;
        out.branch1.push_back(unchecked_state(inst.layout, std::move(b1)));
        out.branch0.push_back(unchecked_state(inst.layout, std::move(b0)));
    }
    return out;
}

struct BasisCheckReport {
    double max_gram_residual;            // branch collection vs identity Gram
    double max_reconstruction_residual;  // U(psi (x) 0) vs branch recombination
    double max_eigen_residual;           // ||P psi - p psi||
    double eig_min, eig_max;
    int degenerate_count;
};

/// Direct verification of the orthonormal-branch-basis property against inner
/// products, independent of how the decomposition was produced.
inline BasisCheckReport verify_orthonormal_basis(const AmplifierInstance& inst,
                                                 const Matrix& p,
                                                 const SpectralDecomposition& sd) {
    BasisCheckReport rep{0.0, 0.0, 0.0, 1.0, 0.0, 0};
    std::vector<const StateVector*> branches;
    for (std::size_t i = 0; i < sd.eigenvalues.size(); ++i) {
        rep.eig_min = std::min(rep.eig_min, sd.eigenvalues[i]);
        rep.eig_max = std::max(rep.eig_max, sd.eigenvalues[i]);
        if (sd.degenerate[i]) {
            ++rep.degenerate_count;
            continue;
        }
        branches.push_back(&*sd.branch0[i]);
        branches.push_back(&*sd.branch1[i]);
    }
    for (std::size_t a = 0; a < branches.size(); ++a)
        for (std::size_t b = 0; b < branches.size(); ++b) {
            const cplx g = branches[a]->inner(*branches[b]);
            const double want = a == b ? 1.0 : 0.0;
            rep.max_gram_residual = std::max(rep.max_gram_residual, std::abs(g - want));
        }

    for (std::size_t i = 0; i < sd.eigenvalues.size(); ++i) {
        if (sd.degenerate[i]) continue;
        const double pi = sd.eigenvalues[i];
        StateVector full = inst.u.apply(embed_prefix(sd.eigenvectors[i], inst.layout));
        double r2 = 0.0;
        for (std::uint64_t x = 0; x < full.dim(); ++x) {
            const cplx want = std::sqrt(pi) * sd.branch1[i]->amp(x) +
                              std::sqrt(1.0 - pi) * sd.branch0[i]->amp(x);
            r2 += std::norm(full.amp(x) - want);
        }
        rep.max_reconstruction_residual =
            std::max(rep.max_reconstruction_residual, std::sqrt(r2));

        // ||P psi - p psi|| via the probe representation.
        const auto probe = detail_rw::probe_or_basis(inst);
        std::vector<cplx> c(probe.size());
        for (std::size_t r = 0; r < probe.size(); ++r)
            c[r] = probe[r].inner(sd.eigenvectors[i]);
        const auto pc = p.mul(c);
        double e2 = 0.0;
        for (std::size_t r = 0; r < probe.size(); ++r) e2 += std::norm(pc[r] - pi * c[r]);
        rep.max_eigen_residual = std::max(rep.max_eigen_residual, std::sqrt(e2));
    }
    return rep;
}

/// One run of the alternating-measurement loop.
struct RewindTranscript {
    int iterations = 0;                 // flag measurements performed
    std::vector<int> flag_outcomes;
    std::vector<int> ancilla_outcomes;  // 1 = ancilla found back in |0...0>
    StateVector final_state = StateVector::basis(RegisterLayout{{"unset", 1}}, std::uint64_t(0));
    double target_fidelity = 0.0;       // vs normalized Pi1 U (input (x) |0>)
    bool halted = false;
};

namespace detail_rw {

// In-place two-outcome measurement on raw amplitudes: samples the outcome,
// collapses, returns (outcome, exact branch probability).
inline std::pair<int, double> measure_inplace(std::vector<cplx>& amps, std::uint64_t mask,
                                              std::uint64_t val, Rng& rng) {
    double p1 = 0.0;
    for (std::uint64_t i = 0; i < amps.size(); ++i)
        if ((i & mask) == val) p1 += std::norm(amps[i]);
    const int outcome = rng.uniform() < p1 ? 1 : 0;
    const double branch = outcome ? p1 : 1.0 - p1;
    if (branch < 1e-12) throw Error("measure: observed branch has probability below 1e-12");
    const double inv = 1.0 / std::sqrt(branch);
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        if (((i & mask) == val) == (outcome == 1))
            amps[i] *= inv;
        else
            amps[i] = cplx(0, 0);
    }
    return {outcome, branch};
}

}  // namespace detail_rw

/// Alternating-measurement amplification: apply U and measure the flag; on
/// success halt with the flag-1 state. On failure apply U^dag, measure
/// whether the ancilla is back in |0...0>, re-apply U and measure the flag
/// again, repeating without limit up to max_iter.
inline RewindTranscript rewind_until_success(const AmplifierInstance& inst,
                                             const StateVector& input, int max_iter, Rng& rng) {
    detail_rw::check_instance(inst);
    if (input.layout() != inst.system_layout())
        throw Error("rewind_until_success: input must live on the system layout");
    if (max_iter < 1) throw Error("rewind_until_success: max_iter must be >= 1");

    const auto [fmask, fval] = inst.flag.resolve(inst.layout);
    const auto [amask, aval] = Projector::all_zero(inst.ancilla_segs).resolve(inst.layout);
    const UnitaryOp u_adj = inst.u.adjoint();

    // Exact target: normalized Pi1 U (input (x) |0>).
    std::vector<cplx> target_raw = detail_rw::flagged_image(inst, input);
    double target_n2 = 0.0;
    for (const auto& a : target_raw) target_n2 += std::norm(a);
    std::optional<StateVector> target;
    if (target_n2 >= 1e-12) {
        const double inv = 1.0 / std::sqrt(target_n2);
        for (auto& a : target_raw) a *= inv;
        target = unchecked_state(inst.layout, std::move(target_raw));
    }

    RewindTranscript tr{0, {}, {}, StateVector::zero(inst.layout), 0.0, false};
    std::vector<cplx> amps = embed_prefix(input, inst.layout).amps();
    for (;;) {
        qsim::detail::apply_inplace(inst.u, inst.layout, amps);
        ++tr.iterations;
        const auto [outcome, prob] = detail_rw::measure_inplace(amps, fmask, fval, rng);
        (void)prob;
        tr.flag_outcomes.push_back(outcome);
        if (outcome == 1) {
            tr.halted = true;
            break;
        }
        if (tr.iterations >= max_iter) break;
        qsim::detail::apply_inplace(u_adj, inst.layout, amps);
        const auto [z, zprob] = detail_rw::measure_inplace(amps, amask, aval, rng);
        (void)zprob;
        tr.ancilla_outcomes.push_back(z);
    }
    tr.final_state = unchecked_state(inst.layout, std::move(amps));
    if (tr.halted && target) tr.target_fidelity = fidelity(tr.final_state, *target);
    return tr;
}

/// Expected flag measurements for an eigenvector input with success
/// probability p, from the exact two-dimensional walk of the alternating
/// measurements. The retry rounds succeed with probability 2p(1-p).
inline double expected_iterations_eigenvector(double p) {
    if (p <= 0.0) throw Error("expected_iterations_eigenvector: p must be positive");
    if (p >= 1.0) return 1.0;
    return 1.0 + 1.0 / (2.0 * p);
}

struct RewindStatsReport {
    double mean_iterations = 0.0;
    double expected_iterations = 0.0;   // alternating-measurement walk prediction
    double min_fidelity = 0.0;
    double median_fidelity = 0.0;
    double mean_fidelity = 0.0;
    int runs = 0;
    int halted_runs = 0;
};

struct RewindTrialRow {
    int iterations;
    double fidelity;
    int halted;
};

/// Aggregated transcripts over an input family after verifying that every
/// eigenvalue of the success operator on the probe subspace lies within
/// `spread` of q.
inline RewindStatsReport rewind_statistics(const AmplifierInstance& inst,
                                           const std::vector<StateVector>& input_family,
                                           double spread, double q, int trials, Rng& rng,
                                           std::vector<RewindTrialRow>* rows = nullptr) {
    if (input_family.empty()) throw Error("rewind_statistics: empty input family");
    const Matrix p = build_P(inst);
    const EigResult eig = hermitian_eig(p);
    for (double v : eig.values)
        if (std::abs(v - q) > spread + 1e-9)
            throw Error("rewind_statistics: eigenvalue spread precondition violated");

    RewindStatsReport rep;
    rep.expected_iterations = expected_iterations_eigenvector(q);
    std::vector<double> iters, fids;
    const std::uint64_t base = rng.next_u64();
    for (int t = 0; t < trials; ++t) {
        Rng trial_rng = Rng::substream(base, static_cast<std::uint64_t>(t));
        const auto& input = input_family[static_cast<std::size_t>(t) % input_family.size()];
        const RewindTranscript tr = rewind_until_success(inst, input, 1 << 20, trial_rng);
        ++rep.runs;
        if (rows)
            rows->push_back(RewindTrialRow{tr.iterations, tr.target_fidelity, tr.halted ? 1 : 0});
        if (!tr.halted) continue;
        ++rep.halted_runs;
        iters.push_back(static_cast<double>(tr.iterations));
        fids.push_back(tr.target_fidelity);
    }
    if (!iters.empty()) {
        rep.mean_iterations = mean(iters);
        rep.min_fidelity = *std::min_element(fids.begin(), fids.end());
        rep.median_fidelity = median(fids);
        rep.mean_fidelity = mean(fids);
    }
    return rep;
}

}  // namespace qsim::rewind
