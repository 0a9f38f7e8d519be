// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#include <cmath>

#include "doctest.h"
#include "qsim/qpke.hpp"
#include "qsim/stats.hpp"

using namespace qsim;
using namespace qsim::qpke;

namespace {

SchemeParams small_params(int lambda, int ell, std::uint64_t seed) {
    return SchemeParams(lambda, ell, seed);
}

}  // namespace

TEST_CASE("gen builds the flat superposition over the prf graph") {
    const auto params = small_params(2, 6, 404);
    Rng rng(1);
    auto [pk, sk] = gen(params, rng);

    const RegisterLayout L = component_layout(params);
    const StateVector& s = pk.c0.state();
    int nonzero = 0;
    for (std::uint64_t i = 0; i < s.dim(); ++i) {
        const double a = std::abs(s.amp(i));
        if (a > 1e-12) {
            ++nonzero;
            CHECK(a == doctest::Approx(0.5));
            CHECK(L.value(i, "y") == params.prf.eval(sk.k0, L.value(i, "x")));
        }
    }
    CHECK(nonzero == 4);
    CHECK(std::abs(s.norm() - 1.0) <= 1e-10);
}

TEST_CASE("gen is deterministic under the seed") {
    const auto params = small_params(2, 6, 404);
    Rng a(9), b(9);
    auto [pka, ska] = gen(params, a);
    auto [pkb, skb] = gen(params, b);
    CHECK(ska.k0 == skb.k0);
    CHECK(ska.k1 == skb.k1);
    CHECK(fidelity(pka.c0.state(), pkb.c0.state()) == doctest::Approx(1.0));
    CHECK(fidelity(pka.c1.state(), pkb.c1.state()) == doctest::Approx(1.0));
}

TEST_CASE("every ciphertext satisfies y = f_kpt(x)") {
    const auto params = small_params(3, 9, 505);
    for (int t = 0; t < 200; ++t) {
        Rng rng = Rng::substream(77, static_cast<std::uint64_t>(t));
        auto [pk, sk] = gen(params, rng);
        for (int pt = 0; pt <= 1; ++pt) {
            const Ciphertext ct = enc(params, pk, pt, rng);
            CHECK(params.prf.eval(pt == 0 ? sk.k0 : sk.k1, ct.x) == ct.y);
        }
    }
}

TEST_CASE("ciphertext x marginal is uniform") {
    const auto params = small_params(3, 9, 606);
    Rng key_rng(5);
    const SecretKey sk{key_rng.bits(3), key_rng.bits(3)};
    std::vector<std::size_t> counts(8, 0);
    for (int t = 0; t < 10000; ++t) {
        Rng rng = Rng::substream(88, static_cast<std::uint64_t>(t));
        PublicKey pk = make_public_key(params, sk);
        counts[enc(params, pk, 0, rng).x]++;
    }
    CHECK(chi2_uniform(counts) < chi2_quantile_999(7));
}

TEST_CASE("encryptions from two fresh copies are independent") {
    const auto params = small_params(2, 6, 707);
    Rng key_rng(6);
    const SecretKey sk{key_rng.bits(2), key_rng.bits(2)};
    const int trials = 4000;
    int equal = 0;
    std::vector<std::size_t> first(4, 0);
    for (int t = 0; t < trials; ++t) {
        Rng rng = Rng::substream(99, static_cast<std::uint64_t>(t));
        PublicKey a = make_public_key(params, sk);
        PublicKey b = make_public_key(params, sk);
        const auto ca = enc(params, a, 0, rng);
        const auto cb = enc(params, b, 0, rng);
        equal += ca.x == cb.x;
        first[ca.x]++;
    }
    // under independence with uniform marginals, P[x_a == x_b] = 1/4
    const double p = static_cast<double>(equal) / trials;
    CHECK(std::abs(p - 0.25) <= 4.0 * binomial_se(0.25, trials));
    CHECK(chi2_uniform(first) < chi2_quantile_999(3));
}

TEST_CASE("public key components are one-shot") {
    const auto params = small_params(2, 6, 808);
    Rng rng(3);
    auto [pk, sk] = gen(params, rng);
    (void)enc(params, pk, 0, rng);
    CHECK_THROWS_AS(enc(params, pk, 0, rng), Error);
    (void)enc(params, pk, 1, rng);  // other component still fresh
    CHECK_THROWS_AS(enc(params, pk, 1, rng), Error);
}

TEST_CASE("decryption prefers k0 and answers bot off-range") {
    // engineered family: two keys, collision at x = 1, plus values off range
    ClassicalFunction f0(1, 4, {1, 7});
    ClassicalFunction f1(1, 4, {2, 7});
    const auto prf = PrfFamily::from_tables({f0, f1});
    SchemeParams params(1, 4, prf);
    const SecretKey sk{0, 1};

    CHECK(dec(params, sk, Ciphertext{1, 7}) == 0);   // collision resolves to k0
    CHECK(dec(params, sk, Ciphertext{0, 2}) == 1);   // only f1 matches
    CHECK(dec(params, sk, Ciphertext{0, 15}) == std::nullopt);
    CHECK(dec(params, sk, Ciphertext{0, 1}) == 0);
}

TEST_CASE("round trips decrypt correctly whenever ranges are disjoint") {
    const auto params = small_params(3, 9, 909);
    for (int t = 0; t < 100; ++t) {
        Rng rng = Rng::substream(111, static_cast<std::uint64_t>(t));
        auto [pk, sk] = gen(params, rng);
        const auto t0 = params.prf.derive(sk.k0).table();
        const auto t1 = params.prf.derive(sk.k1).table();
        bool disjoint = true;
        for (auto a : t0)
            for (auto b : t1) disjoint = disjoint && a != b;
        const Ciphertext c0 = enc(params, pk, 0, rng);
        const Ciphertext c1 = enc(params, pk, 1, rng);
        if (disjoint) {
            CHECK(dec(params, sk, c0) == 0);
            CHECK(dec(params, sk, c1) == 1);
        } else {
            CHECK(dec(params, sk, c0) == 0);  // k0 is checked first regardless
        }
    }
}

TEST_CASE("correctness experiment meets the union-bound floor") {
    const auto params = small_params(4, 12, 1001);
    Rng rng(12);
    const auto rep = correctness_experiment(params, 400, rng);
    const double se = binomial_se(rep.success_rate, 800);
    CHECK(rep.success_rate >= 1.0 - std::pow(2.0, -4) - 4.0 * se);
    CHECK(rep.collision_fraction <= 2.0 * std::pow(2.0, -4));
}

TEST_CASE("stressed output length shows real collisions") {
    const auto params = small_params(2, 2, 1102);
    Rng rng(13);
    const auto rep = correctness_experiment(params, 200, rng);
    CHECK(rep.collision_fraction > 0.0);
}

TEST_CASE("injective disjoint-range family decrypts perfectly") {
    // f_k(x) = (k << lambda) | x : ranges of distinct keys are disjoint and
    // injective in x, so every round trip with k0 != k1 must decode exactly.
    const int lambda = 2;
    std::vector<ClassicalFunction> tables;
    for (std::uint64_t k = 0; k < 4; ++k) {
        std::vector<std::uint64_t> t;
        for (std::uint64_t x = 0; x < 4; ++x) t.push_back((k << lambda) | x);
        tables.emplace_back(lambda, 2 * lambda, t);
    }
    SchemeParams params(lambda, 2 * lambda, PrfFamily::from_tables(std::move(tables)));
    Rng rng(14);
    for (std::uint64_t k0 = 0; k0 < 4; ++k0) {
        for (std::uint64_t k1 = 0; k1 < 4; ++k1) {
            if (k0 == k1) continue;
            const SecretKey sk{k0, k1};
            PublicKey pk = make_public_key(params, sk);
            CHECK(dec(params, sk, enc(params, pk, 0, rng)) == 0);
            CHECK(dec(params, sk, enc(params, pk, 1, rng)) == 1);
        }
    }
}

TEST_CASE("guessing adversary wins half the time") {
    const auto params = small_params(2, 6, 1203);
    int wins = 0;
    const int games = 4000;
    for (int t = 0; t < games; ++t) {
        Rng rng = Rng::substream(1234, static_cast<std::uint64_t>(t));
        GuessingAdversary adv;
        wins += cca_game(params, adv, 2, rng).win;
    }
    const double rate = static_cast<double>(wins) / games;
    CHECK(std::abs(rate - 0.5) <= 4.0 * binomial_se(0.5, games));
}

TEST_CASE("decryption oracle answers spare-copy ciphertexts correctly") {
    const auto params = small_params(2, 6, 1304);
    Rng rng(15);
    ReencryptingAdversary adv(0);
    (void)cca_game(params, adv, 2, rng);
    CHECK(adv.oracle_correct());
}

TEST_CASE("oracle refuses the challenge ciphertext after the challenge") {
    const auto params = small_params(2, 6, 1405);
    Rng rng(16);
    ChallengeProbingAdversary adv;
    const auto tr = cca_game(params, adv, 1, rng);
    CHECK(adv.saw_refusal());
    CHECK(tr.refused_challenge_queries == 1);
}

TEST_CASE("query budget is enforced") {
    const auto params = small_params(2, 6, 1506);

    class HungryAdversary : public CcaAdversary {
      public:
        int phase1(CcaContext&, const Ciphertext& ct, DecOracle& oracle) override {
            for (int i = 0; i < 100; ++i) (void)oracle.query(ct);
            return 0;
        }
    };

    Rng rng(17);
    HungryAdversary adv;
    CHECK_THROWS_AS(cca_game(params, adv, 1, rng, 8), Error);
}

TEST_CASE("identical seeds yield identical game transcripts") {
    const auto params = small_params(3, 9, 1607);
    auto play = [&](std::uint64_t seed) {
        Rng rng(seed);
        GuessingAdversary adv;
        return cca_game(params, adv, 2, rng);
    };
    const auto a = play(505), b = play(505), c = play(506);
    CHECK(a.b == b.b);
    CHECK(a.guess == b.guess);
    CHECK(a.challenge == b.challenge);
    const bool differs = !(a.challenge == c.challenge) || a.b != c.b || a.guess != c.guess;
    CHECK(differs);
}
