#include <cmath>
#include <random>

#include <doctest.h>

#include "ace/features.hpp"

using namespace ace;

namespace {

FeatureSequence random_sequence(std::mt19937_64& rng, int tokens, int dim) {
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    FeatureSequence seq;
    seq.tokens.resize(tokens, FeatureVector(dim));
    for (auto& row : seq.tokens) {
        double norm = 0.0;
        do {
            norm = 0.0;
            for (double& x : row) {
                x = uni(rng);
                norm += x * x;
            }
        } while (norm < 1e-6);
    }
    return seq;
}

}  // namespace

TEST_CASE("rigidity of identical streams is one") {
    std::mt19937_64 rng(3);
    const FeatureSequence f = random_sequence(rng, 9, 6);
    const auto scores = rigidity_scores(f, f);
    for (double s : scores) {
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("negated row scores minus one") {
    std::mt19937_64 rng(5);
    const FeatureSequence f = random_sequence(rng, 5, 4);
    FeatureSequence g = f;
    for (double& x : g.tokens[3]) {
        x = -x;
    }
    const auto scores = rigidity_scores(f, g);
    CHECK(scores[3] == doctest::Approx(-1.0));
    CHECK(scores[1] == doctest::Approx(1.0));
}

TEST_CASE("rigidity matches a per-row cosine oracle") {
    std::mt19937_64 rng(7);
    const FeatureSequence a = random_sequence(rng, 12, 8);
    const FeatureSequence b = random_sequence(rng, 12, 8);
    const auto scores = rigidity_scores(a, b);
    for (std::size_t i = 0; i < a.tokens.size(); ++i) {
        double d = 0.0;
        double na = 0.0;
        double nb = 0.0;
        for (int k = 0; k < 8; ++k) {
            d += a.tokens[i][k] * b.tokens[i][k];
            na += a.tokens[i][k] * a.tokens[i][k];
            nb += b.tokens[i][k] * b.tokens[i][k];
        }
        CHECK(scores[i] == doctest::Approx(d / std::sqrt(na * nb)).epsilon(1e-12));
    }
}

TEST_CASE("rigidity shape errors") {
    std::mt19937_64 rng(9);
    const FeatureSequence a = random_sequence(rng, 4, 5);
    const FeatureSequence b = random_sequence(rng, 5, 5);
    const FeatureSequence c = random_sequence(rng, 4, 6);
    CHECK_THROWS_AS(rigidity_scores(a, b), ShapeError);
    CHECK_THROWS_AS(rigidity_scores(a, c), ShapeError);
    FeatureSequence z = a;
    for (double& x : z.tokens[2]) {
        x = 0.0;
    }
    CHECK_THROWS_AS(rigidity_scores(a, z), DegenerateVector);
}

TEST_CASE("gate mask values and global protection") {
    const std::vector<double> scores = {-1.0, 0.6, 1.0, 0.2};
    const GateMask mask = gate_mask(scores, 20.0, 0.6);
    CHECK(mask.values[0] == 1.0);  // exact, despite S = -1
    CHECK(mask.values[1] == doctest::Approx(0.5));
    CHECK(mask.values[2] == doctest::Approx(sigmoid(20.0 * 0.4)).epsilon(1e-12));
    CHECK(mask.values[2] == doctest::Approx(0.99966).epsilon(1e-4));
    CHECK_THROWS_AS(gate_mask(scores, 0.0, 0.6), InvalidParameter);
    CHECK_THROWS_AS(gate_mask(scores, -3.0, 0.6), InvalidParameter);
}

TEST_CASE("gate is monotone in the score and sharpens with kappa") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const double sa = uni(rng);
        const double sb = uni(rng);
        const GateMask mask = gate_mask({1.0, sa, sb}, 20.0, 0.6);
        if (sa >= sb) {
            CHECK(mask.values[1] >= mask.values[2]);
        } else {
            CHECK(mask.values[1] <= mask.values[2]);
        }
    }
    // Sharpness: |gate - 1/2| strictly grows with kappa off the threshold.
    for (double s : {0.2, 0.55, 0.8, 0.99}) {
        double prev = -1.0;
        for (double kappa : {1.0, 20.0, 200.0}) {
            const double g = gate_mask({1.0, s}, kappa, 0.6).values[1];
            const double sharp = std::abs(g - 0.5);
            CHECK(sharp > prev);
            prev = sharp;
        }
    }
}

TEST_CASE("isolate scales rows by mask values") {
    std::mt19937_64 rng(13);
    const FeatureSequence f = random_sequence(rng, 6, 5);

    GateMask ones;
    ones.values.assign(6, 1.0);
    CHECK(isolate(f, ones) == f);

    GateMask annihilate;
    annihilate.values.assign(6, 0.0);
    annihilate.values[0] = 1.0;
    const FeatureSequence iso = isolate(f, annihilate);
    CHECK(iso.tokens[0] == f.tokens[0]);
    for (std::size_t i = 1; i < 6; ++i) {
        for (double x : iso.tokens[i]) {
            CHECK(x == 0.0);
        }
    }

    GateMask random_mask;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    random_mask.values.resize(6);
    for (double& v : random_mask.values) {
        v = uni(rng);
    }
    const FeatureSequence scaled = isolate(f, random_mask);
    for (std::size_t i = 0; i < 6; ++i) {
        for (int k = 0; k < 5; ++k) {
            CHECK(scaled.tokens[i][k] ==
                  doctest::Approx(f.tokens[i][k] * random_mask.values[i]).epsilon(1e-12));
        }
    }

    GateMask wrong;
    wrong.values.assign(4, 1.0);
    CHECK_THROWS_AS(isolate(f, wrong), ShapeError);
}

TEST_CASE("perturbation locality keeps subject gates high") {
    std::mt19937_64 rng(17);
    const FeatureSequence f_raw = random_sequence(rng, 10, 7);
    FeatureSequence f_cf = f_raw;
    // Only "background" rows 6..9 differ.
    for (std::size_t i = 6; i < 10; ++i) {
        for (double& x : f_cf.tokens[i]) {
            x += 3.0;
        }
    }
    const auto scores = rigidity_scores(f_raw, f_cf);
    const GateMask mask = gate_mask(scores, 20.0, 0.6);
    const double floor = sigmoid(20.0 * (1.0 - 0.6)) - 1e-9;
    for (std::size_t i = 1; i < 6; ++i) {
        CHECK(mask.values[i] >= floor);
    }
}
