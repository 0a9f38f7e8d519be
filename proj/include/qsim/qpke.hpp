// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "qsim/measure.hpp"
#include "qsim/oracles.hpp"

namespace qsim::qpke {

struct SchemeParams {
    int lambda;
    int ell_out;
    PrfFamily prf;

    SchemeParams(int lambda_, int ell_out_, std::uint64_t prf_seed)
        : lambda(lambda_), ell_out(ell_out_), prf(toy_prf(lambda_, ell_out_, prf_seed)) {
        if (lambda + ell_out > max_qubits())
            throw BudgetError("SchemeParams: public-key component exceeds qubit budget");
    }

    SchemeParams(int lambda_, int ell_out_, PrfFamily prf_)
        : lambda(lambda_), ell_out(ell_out_), prf(std::move(prf_)) {
        if (lambda + ell_out > max_qubits())
            throw BudgetError("SchemeParams: public-key component exceeds qubit budget");
        if (prf.in_bits() != lambda || prf.out_bits() != ell_out || prf.key_bits() != lambda)
            throw Error("SchemeParams: PRF shape does not match lambda/ell_out");
    }
};

struct SecretKey {
    std::uint64_t k0, k1;
};

struct Ciphertext {
    std::uint64_t x, y;
    bool operator==(const Ciphertext& rhs) const { return x == rhs.x && y == rhs.y; }
};

/// One public-key half: a pure state consumed by a single measurement.
class PkComponent {
  public:
    PkComponent(StateVector state) : state_(std::move(state)) {}
    PkComponent(const PkComponent&) = delete;
    PkComponent& operator=(const PkComponent&) = delete;
    PkComponent(PkComponent&&) = default;
    PkComponent& operator=(PkComponent&&) = default;

    const StateVector& state() const {
        if (consumed_) throw Error("PkComponent: already consumed");
        return state_;
    }
    bool consumed() const { return consumed_; }

    /// Computational-basis measurement; one-shot.
    std::uint64_t consume_measure(Rng& rng) {
        if (consumed_) throw Error("PkComponent: already consumed");
        consumed_ = true;
        return measure_all(state_, rng).first;
    }

  private:
    StateVector state_;
    bool consumed_ = false;
};

/// Public key: a pair of component states, one per plaintext bit. Move-only,
/// matching the no-cloning semantics of the copies handed to parties.
struct PublicKey {
    PkComponent c0, c1;
    PublicKey(PkComponent a, PkComponent b) : c0(std::move(a)), c1(std::move(b)) {}
    PublicKey(const PublicKey&) = delete;
    PublicKey& operator=(const PublicKey&) = delete;
    PublicKey(PublicKey&&) = default;
    PublicKey& operator=(PublicKey&&) = default;
};

inline RegisterLayout component_layout(const SchemeParams& p) {
    return RegisterLayout{{"x", p.lambda}, {"y", p.ell_out}};
}

/// sum_x |x, f_k(x)> normalized: 2^lambda nonzero amplitudes of 2^{-lambda/2}.
inline StateVector component_state(const SchemeParams& p, std::uint64_t key) {
    RegisterLayout layout = component_layout(p);
    const UnitaryOp prep = UnitaryOp::compose(
        {UnitaryOp::hadamard_layer("x"), lift_to_oracle(p.prf.derive(key), "x", "y")});
    return prep.apply(StateVector::zero(layout));
}

/// Fresh public-key copy for an existing secret key.
inline PublicKey make_public_key(const SchemeParams& p, const SecretKey& sk) {
    return PublicKey(PkComponent(component_state(p, sk.k0)),
                     PkComponent(component_state(p, sk.k1)));
}

inline std::pair<PublicKey, SecretKey> gen(const SchemeParams& p, Rng& rng) {
    SecretKey sk{rng.bits(p.lambda), rng.bits(p.lambda)};
    return {make_public_key(p, sk), sk};
}

/// Measures the selected component in the computational basis; the outcome is
/// the classical ciphertext. Throws on component reuse.
inline Ciphertext enc(const SchemeParams& p, PublicKey& pk, int pt, Rng& rng) {
    if (pt != 0 && pt != 1) throw Error("enc: plaintext must be a bit");
    PkComponent& c = pt == 0 ? pk.c0 : pk.c1;
    const std::uint64_t idx = c.consume_measure(rng);
    const RegisterLayout layout = component_layout(p);
    return Ciphertext{layout.value(idx, "x"), layout.value(idx, "y")};
}

/// 0 if f_{k0}(x) = y, else 1 if f_{k1}(x) = y, else no value (bot). The
/// check order k0-then-k1 is fixed, so collisions resolve to 0.
inline std::optional<int> dec(const SchemeParams& p, const SecretKey& sk, const Ciphertext& ct) {
    if (ct.x >= (std::uint64_t(1) << p.lambda)) return std::nullopt;
    if (p.prf.eval(sk.k0, ct.x) == ct.y) return 0;
    if (p.prf.eval(sk.k1, ct.x) == ct.y) return 1;
    return std::nullopt;
}

struct CorrectnessReport {
    double success_rate;
    double collision_fraction;  // mean fraction of x with f_{k0}(x) in range(f_{k1})
    int trials;
};

struct CorrectnessTrialRow {
    int ok0, ok1;
    double collision_fraction;
};

/// Fresh key pair per trial; one encryption and decryption per plaintext bit;
/// the collision fraction is an exact table scan, not a sample.
inline CorrectnessReport correctness_experiment(const SchemeParams& p, int trials, Rng& rng,
                                                std::vector<CorrectnessTrialRow>* rows = nullptr) {
    if (trials < 1) throw Error("correctness_experiment: trials must be >= 1");
    std::uint64_t successes = 0;
    double collision_sum = 0.0;
    const std::uint64_t base = rng.next_u64();
    for (int t = 0; t < trials; ++t) {
        Rng trial_rng = Rng::substream(base, static_cast<std::uint64_t>(t));
        auto [pk, sk] = gen(p, trial_rng);
        int ok[2] = {0, 0};
        for (int pt = 0; pt <= 1; ++pt) {
            const Ciphertext ct = enc(p, pk, pt, trial_rng);
            const auto out = dec(p, sk, ct);
            ok[pt] = out && *out == pt;
            successes += ok[pt];
        }
        const auto t0 = p.prf.derive(sk.k0);
        const auto t1 = p.prf.derive(sk.k1);
        std::set<std::uint64_t> range1(t1.table().begin(), t1.table().end());
        std::uint64_t hits = 0;
        for (auto v : t0.table()) hits += range1.count(v);
        const double frac = static_cast<double>(hits) / static_cast<double>(t0.table().size());
        collision_sum += frac;
        if (rows) rows->push_back(CorrectnessTrialRow{ok[0], ok[1], frac});
    }
    return CorrectnessReport{static_cast<double>(successes) / (2.0 * trials),
                             collision_sum / trials, trials};
}

// ---------------------------------------------------------------------------
// CCA game harness. Ciphertexts are classical, so the decryption oracle is
// queried classically; the harness enforces the refusal rule on the challenge
// and a per-phase query budget.
// ---------------------------------------------------------------------------

class DecOracle {
  public:
    DecOracle(const SchemeParams& p, const SecretKey& sk, int budget)
        : params_(&p), sk_(sk), budget_(budget) {}

    void set_challenge(const Ciphertext& ct) { challenge_ = ct; }

    std::optional<int> query(const Ciphertext& ct) {
        if (queries_ >= budget_) throw Error("DecOracle: query budget exceeded");
        ++queries_;
        if (challenge_ && ct == *challenge_) {
            ++refused_;
            return std::nullopt;
        }
        return dec(*params_, sk_, ct);
    }

    int queries() const { return queries_; }
    int refused_challenge_queries() const { return refused_; }

  private:
    const SchemeParams* params_;
    SecretKey sk_;
    std::optional<Ciphertext> challenge_;
    int budget_;
    int queries_ = 0;
    int refused_ = 0;
};

struct CcaContext {
    const SchemeParams& params;
    Rng& rng;
};

class CcaAdversary {
  public:
    virtual ~CcaAdversary() = default;
    virtual void phase0(CcaContext& ctx, std::vector<PublicKey>& pks, DecOracle& oracle) {
        (void)ctx;
        (void)pks;
        (void)oracle;
    }
    virtual int phase1(CcaContext& ctx, const Ciphertext& challenge, DecOracle& oracle) = 0;
};

struct CcaTranscript {
    int b;
    int guess;
    bool win;
    Ciphertext challenge;
    int phase0_queries;
    int phase1_queries;
    int refused_challenge_queries;
};

/// One run of the indistinguishability experiment: n fresh public-key copies,
/// uniform challenge bit, challenge ciphertext from a fresh copy, and a
/// decryption oracle that refuses the challenge after it is issued.
inline CcaTranscript cca_game(const SchemeParams& p, CcaAdversary& adv, int n_copies, Rng& rng,
                              int query_budget = 64) {
    SecretKey sk{rng.bits(p.lambda), rng.bits(p.lambda)};
    std::vector<PublicKey> pks;
    pks.reserve(n_copies);
    for (int i = 0; i < n_copies; ++i) pks.push_back(make_public_key(p, sk));

    DecOracle oracle(p, sk, query_budget);
    CcaContext ctx{p, rng};
    adv.phase0(ctx, pks, oracle);
    const int phase0_queries = oracle.queries();

    const int b = rng.coin() ? 1 : 0;
    PublicKey challenge_copy = make_public_key(p, sk);
    const Ciphertext ct = enc(p, challenge_copy, b, rng);
    oracle.set_challenge(ct);

    const int guess = adv.phase1(ctx, ct, oracle);
    return CcaTranscript{b,
                         guess,
                         guess == b,
                         ct,
                         phase0_queries,
                         oracle.queries() - phase0_queries,
                         oracle.refused_challenge_queries()};
}

// Scripted adversaries used by the harness checks.

/// Ignores everything and guesses a uniform bit.
class GuessingAdversary : public CcaAdversary {
  public:
    int phase1(CcaContext& ctx, const Ciphertext&, DecOracle&) override {
        return ctx.rng.coin() ? 1 : 0;
    }
};

/// Encrypts a chosen bit with a spare public-key copy and asks the oracle to
/// decrypt it; records whether the oracle answered correctly.
class ReencryptingAdversary : public CcaAdversary {
  public:
    explicit ReencryptingAdversary(int pt) : pt_(pt) {}

    void phase0(CcaContext& ctx, std::vector<PublicKey>& pks, DecOracle& oracle) override {
        if (pks.empty()) throw Error("ReencryptingAdversary: needs at least one copy");
        const Ciphertext own = enc(ctx.params, pks.front(), pt_, ctx.rng);
        const auto answer = oracle.query(own);
        oracle_correct_ = answer.has_value() && *answer == pt_;
    }

    int phase1(CcaContext& ctx, const Ciphertext&, DecOracle&) override {
        return ctx.rng.coin() ? 1 : 0;
    }

    bool oracle_correct() const { return oracle_correct_; }

  private:
    int pt_;
    bool oracle_correct_ = false;
};

/// Queries the challenge ciphertext itself and records the refusal.
class ChallengeProbingAdversary : public CcaAdversary {
  public:
    int phase1(CcaContext& ctx, const Ciphertext& challenge, DecOracle& oracle) override {
        const auto answer = oracle.query(challenge);
        saw_refusal_ = !answer.has_value();
        return ctx.rng.coin() ? 1 : 0;
    }

    bool saw_refusal() const { return saw_refusal_; }

  private:
    bool saw_refusal_ = false;
};

}  // namespace qsim::qpke
