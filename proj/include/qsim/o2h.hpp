// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "qsim/measure.hpp"
#include "qsim/oracles.hpp"
#include "qsim/stats.hpp"

namespace qsim::o2h {

/// An oracle algorithm with declared query depth: unitary round operators
/// interleaved with oracle queries, then a final unitary and an accept
/// projector. Each round queries one input register (named per round) with
/// answers XOR-ed into the shared output register.
///
/// The instance carries the sampled pair of oracles h and g (equal outside
/// the marked set) so the runner can evolve the same algorithm under both.
struct O2hInstance {
    RegisterLayout layout;
    std::vector<UnitaryOp> pre;          // size = depth; applied before each query
    std::vector<std::string> qin_segs;   // query input register per round
    std::string qout_seg;
    UnitaryOp finale;
    Projector accept;
    ClassicalFunction h, g;
    std::vector<std::uint64_t> marked;   // the set S where h and g may differ
};

struct O2hFamily {
    std::string name;
    int depth;
    std::function<O2hInstance(Rng&)> draw;
};

struct O2hRun {
    double p_left;    // accept probability with h
    double p_right;   // accept probability with g
    double p_guess;   // round-truncation hit probability on the marked set
    bool per_run_bound;
};

namespace detail_o2h {

inline double accept_prob(const O2hInstance& inst, const ClassicalFunction& f) {
    std::vector<cplx> amps(inst.layout.dim(), cplx(0, 0));
    amps[0] = 1.0;
    for (std::size_t r = 0; r < inst.pre.size(); ++r) {
        qsim::detail::apply_inplace(inst.pre[r], inst.layout, amps);
        const UnitaryOp oracle = lift_to_oracle(f, inst.qin_segs[r], inst.qout_seg);
        qsim::detail::apply_inplace(oracle, inst.layout, amps);
    }
    qsim::detail::apply_inplace(inst.finale, inst.layout, amps);
    auto [mask, val] = inst.accept.resolve(inst.layout);
    double p = 0.0;
    for (std::uint64_t i = 0; i < amps.size(); ++i)
        if ((i & mask) == val) p += std::norm(amps[i]);
    return p;
}

// Exact Pr[S cap T != empty]: average over the uniform round choice of the
// marked-set mass in the query input register just before that round's query.
inline double guess_prob(const O2hInstance& inst) {
    const int d = static_cast<int>(inst.pre.size());
    double acc = 0.0;
    std::vector<cplx> amps(inst.layout.dim(), cplx(0, 0));
    amps[0] = 1.0;
    for (int round = 0; round < d; ++round) {
        qsim::detail::apply_inplace(inst.pre[round], inst.layout, amps);
        // Marginal of this round's input register.
        const auto& seg = inst.qin_segs[round];
        const int sh = inst.layout.shift(seg);
        const std::uint64_t m = (std::uint64_t(1) << inst.layout.width(seg)) - 1;
        double hit = 0.0;
        for (std::uint64_t i = 0; i < amps.size(); ++i) {
            const std::uint64_t x = (i >> sh) & m;
            for (auto s : inst.marked)
                if (x == s) {
                    hit += std::norm(amps[i]);
                    break;
                }
        }
        acc += hit;
        const UnitaryOp oracle = lift_to_oracle(inst.h, seg, inst.qout_seg);
        qsim::detail::apply_inplace(oracle, inst.layout, amps);
    }
    return acc / d;
}

}  // namespace detail_o2h

inline O2hRun o2h_single(const O2hFamily& family, Rng& rng) {
    const O2hInstance inst = family.draw(rng);
    if (static_cast<int>(inst.pre.size()) != family.depth ||
        inst.qin_segs.size() != inst.pre.size())
        throw Error("o2h: instance round count does not match declared depth");
    O2hRun run;
    run.p_left = detail_o2h::accept_prob(inst, inst.h);
    run.p_right = detail_o2h::accept_prob(inst, inst.g);
    run.p_guess = detail_o2h::guess_prob(inst);
    const double d = static_cast<double>(family.depth);
    const double rhs = 2.0 * d * std::sqrt(std::max(run.p_guess, 0.0));
    run.per_run_bound = std::abs(run.p_left - run.p_right) <= rhs + 1e-9 &&
                        std::abs(std::sqrt(run.p_left) - std::sqrt(run.p_right)) <= rhs + 1e-9;
    return run;
}

struct O2hReport {
    std::string family;
    int depth = 0;
    int trials = 0;
    double p_left = 0.0, p_right = 0.0, p_guess = 0.0;
    double se_left = 0.0, se_right = 0.0, se_guess = 0.0;
    bool bound_holds = false;       // aggregate inequality with 4 SE slack
    bool every_run_bound = false;   // exact per-draw inequality
};

/// Monte Carlo over oracle draws; the per-draw probabilities are exact, so
/// the statistical slack only covers the draw average.
inline O2hReport o2h_experiment(const O2hFamily& family, int trials, Rng& rng,
                                std::vector<O2hRun>* runs = nullptr) {
    if (trials < 1) throw Error("o2h_experiment: trials must be >= 1");
    O2hReport rep;
    rep.family = family.name;
    rep.depth = family.depth;
    rep.trials = trials;
    std::vector<double> lefts, rights, guesses;
    bool all_runs = true;
    const std::uint64_t base = rng.next_u64();
    for (int t = 0; t < trials; ++t) {
        Rng trial_rng = Rng::substream(base, static_cast<std::uint64_t>(t));
        const O2hRun run = o2h_single(family, trial_rng);
        lefts.push_back(run.p_left);
        rights.push_back(run.p_right);
        guesses.push_back(run.p_guess);
        all_runs = all_runs && run.per_run_bound;
        if (runs) runs->push_back(run);
    }
    rep.p_left = mean(lefts);
    rep.p_right = mean(rights);
    rep.p_guess = mean(guesses);
    rep.se_left = standard_error(lefts);
    rep.se_right = standard_error(rights);
    rep.se_guess = standard_error(guesses);
    rep.every_run_bound = all_runs;
    const double d = static_cast<double>(family.depth);
    const double slack = 4.0 * std::sqrt(rep.se_left * rep.se_left + rep.se_right * rep.se_right);
    const double rhs = 2.0 * d * std::sqrt(std::max(rep.p_guess + 4.0 * rep.se_guess, 0.0));
    rep.bound_holds = std::abs(rep.p_left - rep.p_right) <= rhs + slack + 1e-9;
    return rep;
}

// ---------------------------------------------------------------------------
// Built-in adversary families.
// ---------------------------------------------------------------------------

/// S is empty and g == h: both runs are identical and the guess probability
/// vanishes.
inline O2hFamily family_empty_set(int domain_bits, int depth) {
    return O2hFamily{
        "empty-set", depth, [domain_bits, depth](Rng& rng) {
            const int range_bits = 2;
            ClassicalFunction h = sample_random_function(domain_bits, range_bits, rng);
            O2hInstance inst{RegisterLayout{{"qin", domain_bits}, {"qout", range_bits}},
                             {},
                             {},
                             "qout",
                             UnitaryOp::identity(),
                             Projector::bit_equals("qout", 0, 1),
                             h,
                             h,
                             {}};
            for (int r = 0; r < depth; ++r) {
                inst.pre.push_back(r == 0 ? UnitaryOp::hadamard_layer("qin")
                                          : UnitaryOp::identity());
                inst.qin_segs.push_back("qin");
            }
            return inst;
        }};
}

/// Classically queries a fixed decoy point for the first d-1 rounds and the
/// marked point s in the last round, then tests the accumulated response
/// against the reference value. p_left = 1, p_right = 0, p_guess = 1/d.
inline O2hFamily family_planted_probe(int domain_bits, int depth) {
    return O2hFamily{
        "planted-probe", depth, [domain_bits, depth](Rng& rng) {
            const int range_bits = std::min(domain_bits, 4);
            ClassicalFunction h = sample_random_function(domain_bits, range_bits, rng);
            const std::uint64_t s = rng.bits(domain_bits);
            std::uint64_t decoy = rng.bits(domain_bits);
            if (decoy == s) decoy = s ^ 1;
            // g differs from h exactly on s (nonzero xor delta).
            auto gt = h.table();
            const std::uint64_t delta =
                1 + rng.bits(range_bits) % ((std::uint64_t(1) << range_bits) - 1);
            gt[s] ^= delta;
            ClassicalFunction g(domain_bits, range_bits, gt);

            std::uint64_t reference = h.eval(s);
            if ((depth - 1) % 2 == 1) reference ^= h.eval(decoy);

            O2hInstance inst{RegisterLayout{{"qin", domain_bits}, {"qout", range_bits},
                                            {"flag", 1}},
                             {},
                             {},
                             "qout",
                             UnitaryOp::check_flip({{"qout", reference}}, "flag"),
                             Projector::segment_equals("flag", 1),
                             h,
                             g,
                             {s}};
            for (int r = 0; r < depth; ++r) {
                if (r == 0)
                    inst.pre.push_back(UnitaryOp::xor_constant("qin", depth == 1 ? s : decoy));
                else if (r == depth - 1)
                    inst.pre.push_back(UnitaryOp::xor_constant("qin", decoy ^ s));
                else
                    inst.pre.push_back(UnitaryOp::identity());
                inst.qin_segs.push_back("qin");
            }
            return inst;
        }};
}

/// Queries a fresh uniform superposition each round; the marked set is a
/// random quarter of the domain.
inline O2hFamily family_uniform_queries(int domain_bits, int depth) {
    return O2hFamily{
        "uniform-queries", depth, [domain_bits, depth](Rng& rng) {
            const int range_bits = 2;
            ClassicalFunction h = sample_random_function(domain_bits, range_bits, rng);
            auto gt = h.table();
            std::vector<std::uint64_t> marked;
            for (std::uint64_t x = 0; x < gt.size(); ++x) {
                if (rng.uniform() < 0.25) {
                    marked.push_back(x);
                    gt[x] = rng.bits(range_bits);
                }
            }
            ClassicalFunction g(domain_bits, range_bits, gt);
            O2hInstance inst{RegisterLayout{{"qin", domain_bits}, {"qout", range_bits}},
                             {},
                             {},
                             "qout",
                             UnitaryOp::hadamard_layer("qin"),
                             Projector::bit_equals("qout", 0, 1),
                             h,
                             g,
                             marked};
            for (int r = 0; r < depth; ++r) {
                inst.pre.push_back(UnitaryOp::hadamard_layer("qin"));
                inst.qin_segs.push_back("qin");
            }
            return inst;
        }};
}

/// Coherently adaptive: later query inputs are steered by CNOTs from the
/// accumulated response register.
inline O2hFamily family_adaptive_coherent(int domain_bits, int depth) {
    return O2hFamily{
        "adaptive-coherent", depth, [domain_bits, depth](Rng& rng) {
            const int range_bits = 2;
            ClassicalFunction h = sample_random_function(domain_bits, range_bits, rng);
            const std::uint64_t s = rng.bits(domain_bits);
            auto gt = h.table();
            gt[s] ^= 1;
            ClassicalFunction g(domain_bits, range_bits, gt);

            Matrix cnot(4);
            cnot.at(0, 0) = cnot.at(1, 1) = cnot.at(2, 3) = cnot.at(3, 2) = 1.0;

            O2hInstance inst{RegisterLayout{{"qin", domain_bits}, {"qout", range_bits}},
                             {},
                             {},
                             "qout",
                             UnitaryOp::identity(),
                             Projector::bit_equals("qout", 1, 1),
                             h,
                             g,
                             {s}};
            for (int r = 0; r < depth; ++r) {
                if (r == 0) {
                    inst.pre.push_back(UnitaryOp::hadamard_layer("qin"));
                } else {
                    std::vector<UnitaryOp> steps;
                    steps.push_back(UnitaryOp::dense_on_qubits(
                        {QubitRef{"qout", 0}, QubitRef{"qin", domain_bits - 1}}, cnot));
                    steps.push_back(UnitaryOp::dense_on_qubits(
                        {QubitRef{"qout", 1}, QubitRef{"qin", 0}}, cnot));
                    inst.pre.push_back(UnitaryOp::compose(std::move(steps)));
                }
                inst.qin_segs.push_back("qin");
            }
            return inst;
        }};
}

/// Amplitude-amplification rounds against the points where the binary oracle
/// answers 1; h and g disagree on a random single point.
inline O2hFamily family_grover(int domain_bits, int depth) {
    return O2hFamily{
        "grover", depth, [domain_bits, depth](Rng& rng) {
            ClassicalFunction h = sample_random_function(domain_bits, 1, rng);
            const std::uint64_t s = rng.bits(domain_bits);
            auto gt = h.table();
            gt[s] ^= 1;
            ClassicalFunction g(domain_bits, 1, gt);

            const int dim = 1 << domain_bits;
            Matrix reflect0(dim);  // 2|0><0| - I
            for (int i = 0; i < dim; ++i) reflect0.at(i, i) = i == 0 ? 1.0 : -1.0;
            const UnitaryOp diffusion = UnitaryOp::compose(
                {UnitaryOp::hadamard_layer("qin"), UnitaryOp::dense({"qin"}, reflect0),
                 UnitaryOp::hadamard_layer("qin")});

            O2hInstance inst{RegisterLayout{{"qin", domain_bits}, {"qout", 1}},
                             {},
                             {},
                             "qout",
                             UnitaryOp::identity(),
                             Projector::bit_equals("qin", 0, 1),
                             h,
                             g,
                             {s}};
            for (int r = 0; r < depth; ++r) {
                if (r == 0) {
                    // |-> response register turns queries into phase flips.
                    inst.pre.push_back(UnitaryOp::compose({UnitaryOp::xor_constant("qout", 1),
                                                           UnitaryOp::hadamard_layer("qout"),
                                                           UnitaryOp::hadamard_layer("qin")}));
                } else {
                    inst.pre.push_back(diffusion);
                }
                inst.qin_segs.push_back("qin");
            }
            return inst;
        }};
}

/// The oracle-facing shape of the scheme's random-function reduction:
/// n_copies uniform-superposition key-preparation queries on fresh registers,
/// then q_classical basis-state decryption-simulation queries, with one
/// uniformly hidden challenge point. By construction the averaged guess
/// probability is at most (n_copies + q_classical) / 2^lambda.
inline O2hFamily family_hybrid_reduction(int lambda, int n_copies, int q_classical) {
    const int depth = n_copies + q_classical;
    return O2hFamily{
        "hybrid-reduction", depth, [lambda, n_copies, q_classical, depth](Rng& rng) {
            const int range_bits = 3 * lambda;
            ClassicalFunction h = sample_random_function(lambda, range_bits, rng);
            const std::uint64_t challenge = rng.bits(lambda);
            auto gt = h.table();
            gt[challenge] = rng.bits(range_bits);  // fresh uniform value at the hidden point
            ClassicalFunction g(lambda, range_bits, gt);

            std::vector<Segment> segs;
            for (int i = 0; i < n_copies; ++i) segs.push_back({"qsup" + std::to_string(i), lambda});
            segs.push_back({"qcls", lambda});
            segs.push_back({"qout", range_bits});

            O2hInstance inst{RegisterLayout(segs),
                             {},
                             {},
                             "qout",
                             UnitaryOp::identity(),
                             Projector::bit_equals("qout", 0, 1),
                             h,
                             g,
                             {challenge}};
            std::uint64_t prev = 0;
            for (int r = 0; r < depth; ++r) {
                if (r < n_copies) {
                    inst.pre.push_back(UnitaryOp::hadamard_layer("qsup" + std::to_string(r)));
                    inst.qin_segs.push_back("qsup" + std::to_string(r));
                } else {
                    const std::uint64_t point = rng.bits(lambda);
                    inst.pre.push_back(UnitaryOp::xor_constant("qcls", prev ^ point));
                    inst.qin_segs.push_back("qcls");
                    prev = point;
                }
            }
            return inst;
        }};
}

/// The family suite exercised by the checks.
inline std::vector<O2hFamily> builtin_families(int domain_bits, int depth) {
    return {family_empty_set(domain_bits, depth),
            family_planted_probe(domain_bits, depth),
            family_uniform_queries(domain_bits, depth),
            family_adaptive_coherent(domain_bits, depth),
            family_grover(domain_bits, depth),
            family_hybrid_reduction(3, 2, 2)};
}

}  // namespace qsim::o2h
