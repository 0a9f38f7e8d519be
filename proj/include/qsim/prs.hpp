// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsim/haar.hpp"
#include "qsim/oracles.hpp"
#include "qsim/qpke.hpp"
#include "qsim/rewinding.hpp"
#include "qsim/stats.hpp"

namespace qsim::prs {

/// Key-guessing attack instance against a keyed state family: m challenge
/// copies feed the rewinding stage, m_dist fresh copies feed the swap-test
/// distinguisher. Registers: prs0..prs{m-1} (n qubits each), sk, out.
struct PrsInstance {
    KeyedUnitaryFamily family;
    int m;
    int m_dist;

    PrsInstance(KeyedUnitaryFamily fam, int m_copies, int m_dist_copies)
        : family(std::move(fam)), m(m_copies), m_dist(m_dist_copies) {
        if (m < 1 || m_dist < 1) throw Error("PrsInstance: copy counts must be >= 1");
        if (m * family.state_qubits() + family.key_bits() + 1 > max_qubits())
            throw BudgetError("PrsInstance: " +
                              std::to_string(m * family.state_qubits() + family.key_bits() + 1) +
                              " qubits exceed budget of " + std::to_string(max_qubits()));
    }

    int n() const { return family.state_qubits(); }
    int key_bits() const { return family.key_bits(); }

    RegisterLayout attack_layout() const {
        std::vector<Segment> segs;
        for (int i = 0; i < m; ++i) segs.push_back({"prs" + std::to_string(i), n()});
        segs.push_back({"sk", key_bits()});
        segs.push_back({"out", 1});
        return RegisterLayout(segs);
    }

    RegisterLayout prs_layout() const {
        std::vector<Segment> segs;
        for (int i = 0; i < m; ++i) segs.push_back({"prs" + std::to_string(i), n()});
        return RegisterLayout(segs);
    }

    std::vector<std::string> prs_segs() const {
        std::vector<std::string> v;
        for (int i = 0; i < m; ++i) v.push_back("prs" + std::to_string(i));
        return v;
    }

    /// Uniform superposition over key guesses.
    UnitaryOp u_init() const { return UnitaryOp::hadamard_layer("sk"); }

    /// Controlled on sk, apply (U_sk^dag) to every copy register.
    UnitaryOp u_invert() const { return family.controlled("sk", prs_segs()).adjoint(); }

    /// Flip out iff every copy register is all-zero.
    UnitaryOp u_check() const {
        std::vector<std::pair<std::string, std::uint64_t>> pattern;
        for (const auto& s : prs_segs()) pattern.emplace_back(s, 0);
        return UnitaryOp::check_flip(std::move(pattern), "out");
    }

    UnitaryOp u_prs() const { return UnitaryOp::compose({u_init(), u_invert(), u_check()}); }

    rewind::AmplifierInstance amplifier(std::vector<StateVector> probe = {}) const {
        return rewind::AmplifierInstance{attack_layout(), prs_segs(), {"sk", "out"},
                                         u_prs(),         Projector::segment_equals("out", 1),
                                         std::move(probe)};
    }
};

/// psi^(x m) on the copy registers.
inline StateVector challenge_copies(const PrsInstance& inst, const StateVector& psi_single) {
    if (psi_single.layout().total_qubits() != inst.n())
        throw Error("challenge_copies: single-copy state has wrong size");
    const RegisterLayout layout = inst.prs_layout();
    const std::uint64_t d1 = psi_single.dim();
    std::vector<cplx> amps(layout.dim());
    for (std::uint64_t i = 0; i < layout.dim(); ++i) {
        cplx a(1, 0);
        std::uint64_t rest = i;
        for (int c = inst.m - 1; c >= 0; --c) {
            a *= psi_single.amp(rest % d1);
            rest /= d1;
        }
        amps[i] = a;
    }
    qsim::detail::normalize(amps);
    return unchecked_state(layout, std::move(amps));
}

/// p(psi) = ||Pi1 U (psi^(x m) (x) |0>_sk |0>_out)||^2 by exact evolution.
inline double success_prob_exact(const PrsInstance& inst, const StateVector& psi_single) {
    const StateVector start = embed_prefix(challenge_copies(inst, psi_single),
                                           inst.attack_layout());
    const StateVector evolved = inst.u_prs().apply(start);
    return Projector::segment_equals("out", 1).prob(evolved);
}

/// Same quantity through the success-operator quadratic form <psi|P|psi> with
/// P materialized on the one-state probe.
inline double success_prob_via_operator(const PrsInstance& inst, const StateVector& psi_single) {
    auto amp = inst.amplifier({challenge_copies(inst, psi_single)});
    const Matrix p = rewind::build_P(amp);
    return p.at(0, 0).real();
}

/// Closed-form average over the key register from member-state overlaps:
/// p = (1/K) sum_sk |<psi_sk|psi>|^(2m). Independent of the statevector
/// machinery; used as a cross-check oracle.
inline double success_prob_formula(const PrsInstance& inst, const StateVector& psi_single) {
    double acc = 0.0;
    for (std::uint64_t k = 0; k < inst.family.key_count(); ++k) {
        const double f = std::norm(inst.family.member_state(k).inner(psi_single));
        double powm = 1.0;
        for (int i = 0; i < inst.m; ++i) powm *= f;
        acc += powm;
    }
    return acc / static_cast<double>(inst.family.key_count());
}

struct AttackResult {
    std::optional<std::uint64_t> recovered_key;
    rewind::RewindTranscript transcript;
    double final_state_fidelity_vs_target = 0.0;  // vs |0...0>|sk*>|1> when planted known
    double success_prob = 0.0;                    // exact p for this challenge
};

/// Runs the rewinding loop on the attack unitary; on success reverts the
/// controlled inversion and measures the key register.
inline AttackResult get_sk(const PrsInstance& inst, const StateVector& psi_single,
                           std::optional<std::uint64_t> planted_key, int max_iter, Rng& rng) {
    const auto amp = inst.amplifier();
    const StateVector copies = challenge_copies(inst, psi_single);

    AttackResult res;
    res.success_prob = success_prob_exact(inst, psi_single);
    res.transcript = rewind::rewind_until_success(amp, copies, max_iter, rng);
    if (!res.transcript.halted) return res;

    if (planted_key) {
        std::vector<std::uint64_t> vals(inst.m, 0);
        vals.push_back(*planted_key);
        vals.push_back(1);
        const StateVector target = StateVector::basis(amp.layout, vals);
        res.final_state_fidelity_vs_target = fidelity(res.transcript.final_state, target);
    }

    StateVector reverted = inst.u_invert().adjoint().apply(res.transcript.final_state);
    res.recovered_key = measure_segment(reverted, "sk", rng).value;
    return res;
}

enum class Verdict { pseudorandom, haar };

struct DistinguishResult {
    Verdict verdict;
    int accepts = 0;
    double accept_prob = 0.0;  // exact per-test accept probability
};

/// m_dist independent swap tests between the candidate state for the
/// recovered key and fresh challenge copies; accept fraction >= tau declares
/// the challenge pseudorandom.
inline DistinguishResult distinguish(const PrsInstance& inst, std::uint64_t recovered_key,
                                     const StateVector& fresh_single, double tau, Rng& rng) {
    const StateVector candidate = inst.family.member_state(recovered_key);
    DistinguishResult res;
    for (int i = 0; i < inst.m_dist; ++i) {
        const SwapTestResult st = swap_test(candidate, fresh_single, rng);
        res.accepts += st.accept;
        res.accept_prob = st.accept_prob;
    }
    res.verdict = static_cast<double>(res.accepts) >= tau * inst.m_dist - 1e-12
                      ? Verdict::pseudorandom
                      : Verdict::haar;
    return res;
}

struct PrsAttackReport {
    int trials = 0;
    int correct = 0;
    double advantage = 0.0;
    Interval wilson{0.0, 1.0};          // on Pr[correct]
    double key_recovery_rate = 0.0;     // among pseudorandom-arm trials
    double mean_iterations = 0.0;
    double mean_p_family = 0.0;         // exact success prob, family-arm challenges
    double mean_p_haar = 0.0;           // exact success prob, haar-arm challenges
    int unhalted = 0;
};

struct PrsTrialRow {
    int is_prs;
    int recovered_planted;
    int verdict_prs;
    int correct;
    int iterations;
};

/// Full pipeline: a fair coin picks a family state (planted key) or a Haar
/// state; get_sk consumes m copies; distinguish tests m_dist fresh copies;
/// advantage = Pr[correct] - 1/2. With `control_arm`, the recovered key is
/// discarded and the verdict replaced by a coin flip.
inline PrsAttackReport prs_impossibility_experiment(const PrsInstance& inst, int trials,
                                                    double tau, Rng& rng,
                                                    bool control_arm = false,
                                                    int max_iter = 20000,
                                                    std::vector<PrsTrialRow>* rows = nullptr) {
    PrsAttackReport rep;
    rep.trials = trials;
    std::vector<double> iterations, p_family, p_haar;
    int prs_trials = 0, prs_recovered = 0;
    const std::uint64_t base = rng.next_u64();
    for (int t = 0; t < trials; ++t) {
        Rng trial_rng = Rng::substream(base, static_cast<std::uint64_t>(t));
        const bool is_prs = trial_rng.coin();
        std::optional<std::uint64_t> planted;
        StateVector psi = [&]() {
            if (is_prs) {
                const std::uint64_t key = trial_rng.bits(inst.key_bits());
                planted = key;
                return inst.family.member_state(key);
            }
            return haar_state(inst.n(), trial_rng);
        }();

        const AttackResult atk = get_sk(inst, psi, planted, max_iter, trial_rng);
        if (atk.transcript.halted) iterations.push_back(atk.transcript.iterations);
        else ++rep.unhalted;
        (is_prs ? p_family : p_haar).push_back(atk.success_prob);
        const bool recovered_planted =
            atk.recovered_key && planted && *atk.recovered_key == *planted;
        if (is_prs) {
            ++prs_trials;
            if (recovered_planted) ++prs_recovered;
        }

        Verdict verdict = Verdict::haar;
        if (control_arm) {
            verdict = trial_rng.coin() ? Verdict::pseudorandom : Verdict::haar;
        } else if (atk.recovered_key) {
            verdict = distinguish(inst, *atk.recovered_key, psi, tau, trial_rng).verdict;
        }
        const bool correct = (verdict == Verdict::pseudorandom) == is_prs;
        rep.correct += correct ? 1 : 0;
        if (rows)
            rows->push_back(PrsTrialRow{is_prs ? 1 : 0, recovered_planted ? 1 : 0,
                                        verdict == Verdict::pseudorandom ? 1 : 0,
                                        correct ? 1 : 0, atk.transcript.iterations});
    }
    rep.advantage = static_cast<double>(rep.correct) / trials - 0.5;
    rep.wilson = wilson_interval(static_cast<std::size_t>(rep.correct),
                                 static_cast<std::size_t>(trials));
    rep.key_recovery_rate =
        prs_trials ? static_cast<double>(prs_recovered) / prs_trials : 0.0;
    if (!iterations.empty()) rep.mean_iterations = mean(iterations);
    if (!p_family.empty()) rep.mean_p_family = mean(p_family);
    if (!p_haar.empty()) rep.mean_p_haar = mean(p_haar);
    return rep;
}

struct QpkeAttackReport {
    int trials = 0;
    double key_recovery_rate = 0.0;
    double decrypt_success_rate = 0.0;
    double p_exact_mean = 0.0;   // success-operator value for the planted challenge
    double q_theory = 0.0;       // 1 / 2^m reference value
    double mean_iterations = 0.0;
    int unhalted = 0;
};

struct QpkeAttackTrialRow {
    int recovered_exact;
    int decrypt_ok;
    double p_exact;
    int iterations;
};

/// Key-recovery attack against the scheme: the pk0 preparation circuit is a
/// keyed state family, so get_sk on m public-key copies recovers a key
/// candidate which is then used to decrypt a fresh challenge ciphertext.
inline QpkeAttackReport qpke_attack(const qpke::SchemeParams& params, int m, int max_iter,
                                    int trials, Rng& rng,
                                    std::vector<QpkeAttackTrialRow>* rows = nullptr) {
    const KeyedUnitaryFamily family = KeyedUnitaryFamily::pk_preparation(params.prf);
    const PrsInstance inst(family, m, 1);

    QpkeAttackReport rep;
    rep.trials = trials;
    rep.q_theory = 1.0 / static_cast<double>(std::uint64_t(1) << m);
    std::vector<double> iterations, ps;
    int recovered_count = 0, decrypt_ok = 0;
    const std::uint64_t base = rng.next_u64();
    for (int t = 0; t < trials; ++t) {
        Rng trial_rng = Rng::substream(base, static_cast<std::uint64_t>(t));
        const qpke::SecretKey sk{trial_rng.bits(params.lambda), trial_rng.bits(params.lambda)};
        const StateVector psi = family.member_state(sk.k0);

        const AttackResult atk = get_sk(inst, psi, sk.k0, max_iter, trial_rng);
        ps.push_back(atk.success_prob);
        if (atk.transcript.halted) iterations.push_back(atk.transcript.iterations);
        else ++rep.unhalted;
        int recovered_exact = 0, trial_decrypt_ok = 0;
        if (atk.recovered_key) {
            const std::uint64_t guess_key = *atk.recovered_key;
            recovered_exact = guess_key == sk.k0;
            recovered_count += recovered_exact;

            // Fresh challenge; decrypt with the recovered key.
            qpke::PublicKey challenge_pk = qpke::make_public_key(params, sk);
            const int b = trial_rng.coin() ? 1 : 0;
            const qpke::Ciphertext ct = qpke::enc(params, challenge_pk, b, trial_rng);
            const int guess = params.prf.eval(guess_key, ct.x) == ct.y ? 0 : 1;
            trial_decrypt_ok = guess == b;
            decrypt_ok += trial_decrypt_ok;
        }
        if (rows)
            rows->push_back(QpkeAttackTrialRow{recovered_exact, trial_decrypt_ok,
                                               atk.success_prob, atk.transcript.iterations});
    }
    rep.key_recovery_rate = static_cast<double>(recovered_count) / trials;
    rep.decrypt_success_rate = static_cast<double>(decrypt_ok) / trials;
    if (!ps.empty()) rep.p_exact_mean = mean(ps);
    if (!iterations.empty()) rep.mean_iterations = mean(iterations);
    return rep;
}

}  // namespace qsim::prs
