#include <cmath>
#include <random>

#include <doctest.h>

#include "ace/numerics.hpp"

using namespace ace;

namespace {

// Independent reference evaluations, kept deliberately naive.
double naive_kl(const std::vector<double>& p, const std::vector<double>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > 0.0) {
            s += p[i] * std::log(p[i] / q[i]);
        }
    }
    return s;
}

double naive_jsd(const std::vector<double>& p, const std::vector<double>& q) {
    std::vector<double> m(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = 0.5 * (p[i] + q[i]);
    }
    return 0.5 * naive_kl(p, m) + 0.5 * naive_kl(q, m);
}

ProbVector random_distribution(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    ProbVector p(n);
    double sum = 0.0;
    for (double& v : p) {
        v = uni(rng) + 1e-6;
        sum += v;
    }
    for (double& v : p) {
        v /= sum;
    }
    return p;
}

}  // namespace

TEST_CASE("softmax uniform on equal logits") {
    const ProbVector p = softmax({0.0, 0.0, 0.0});
    for (double v : p) {
        CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    }
}

TEST_CASE("softmax matches direct evaluation") {
    const ProbVector p = softmax({2.0, 0.0});
    const double e2 = std::exp(2.0);
    CHECK(p[0] == doctest::Approx(e2 / (e2 + 1.0)).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(1.0 / (e2 + 1.0)).epsilon(1e-12));
    CHECK(p[0] == doctest::Approx(0.8808).epsilon(1e-4));
    CHECK(p[1] == doctest::Approx(0.1192).epsilon(1e-4));
}

TEST_CASE("softmax shift invariance and normalization") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> uni(-30.0, 30.0);
    for (int trial = 0; trial < 500; ++trial) {
        LogitVector x(1 + rng() % 16);
        for (double& v : x) {
            v = uni(rng);
        }
        const double c = uni(rng);
        LogitVector shifted(x);
        for (double& v : shifted) {
            v += c;
        }
        const ProbVector p = softmax(x);
        const ProbVector q = softmax(shifted);
        double sum = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(std::abs(p[i] - q[i]) < 1e-9);
            sum += p[i];
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("softmax survives extreme magnitudes") {
    const ProbVector p = softmax({1000.0, 0.0, -1000.0});
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(is_valid_probability(p));
}

TEST_CASE("softmax error paths") {
    CHECK_THROWS_AS(softmax({}), InvalidLogits);
    CHECK_THROWS_AS(softmax({1.0, std::nan("")}), InvalidLogits);
    CHECK_THROWS_AS(softmax({1.0, 2.0}, 0.0), InvalidParameter);
    CHECK_THROWS_AS(softmax({1.0, 2.0}, -1.0), InvalidParameter);
}

TEST_CASE("cosine similarity basics") {
    CHECK(cosine_similarity({1.0, 2.0, -3.0}, {1.0, 2.0, -3.0}) == doctest::Approx(1.0));
    CHECK(cosine_similarity({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(0.0));
    // Direct dot/norm evaluation: 32 / (sqrt(14)*sqrt(77)).
    const double expected = 32.0 / (std::sqrt(14.0) * std::sqrt(77.0));
    CHECK(cosine_similarity({1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(cosine_similarity({1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}) ==
          doctest::Approx(0.97463).epsilon(1e-5));
}

TEST_CASE("cosine similarity clamps and errors") {
    CHECK(cosine_similarity({1e-3, 0.0}, {1e-3, 0.0}) <= 1.0);
    CHECK_THROWS_AS(cosine_similarity({0.0, 0.0}, {1.0, 0.0}), DegenerateVector);
    CHECK_THROWS_AS(cosine_similarity({1.0}, {1.0, 2.0}), ShapeError);
}

TEST_CASE("cosine similarity scale invariance") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        FeatureVector a(8);
        FeatureVector b(8);
        for (int i = 0; i < 8; ++i) {
            a[i] = uni(rng) + 0.01;
            b[i] = uni(rng) + 0.01;
        }
        const double c = 0.001 + 100.0 * std::abs(uni(rng));
        FeatureVector ca(a);
        for (double& v : ca) {
            v *= c;
        }
        CHECK(std::abs(cosine_similarity(a, b) - cosine_similarity(ca, b)) < 1e-12);
    }
}

TEST_CASE("jsd on identical and disjoint distributions") {
    const ProbVector p = {0.3, 0.7};
    CHECK(jsd(p, p) == doctest::Approx(0.0));
    CHECK(jsd({1.0, 0.0}, {0.0, 1.0}) == doctest::Approx(kLn2).epsilon(1e-12));
}

TEST_CASE("jsd matches the midpoint formula") {
    const double expected = naive_jsd({0.5, 0.5}, {0.9, 0.1});
    CHECK(jsd({0.5, 0.5}, {0.9, 0.1}) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(jsd({0.5, 0.5}, {0.9, 0.1}) == doctest::Approx(0.1017).epsilon(2e-3));
}

TEST_CASE("jsd symmetry and bounds on random pairs") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t n = 2 + rng() % 12;
        const ProbVector p = random_distribution(rng, n);
        const ProbVector q = random_distribution(rng, n);
        const double d1 = jsd(p, q);
        const double d2 = jsd(q, p);
        CHECK(std::abs(d1 - d2) < 1e-12);
        CHECK(d1 >= 0.0);
        CHECK(d1 <= kLn2 + 1e-12);
        CHECK(d1 == doctest::Approx(naive_jsd(p, q)).epsilon(1e-12));
    }
}

TEST_CASE("jsd error paths") {
    CHECK_THROWS_AS(jsd({0.5, 0.5}, {1.0}), ShapeError);
    CHECK_THROWS_AS(jsd({0.5, 0.6}, {0.5, 0.5}), InvalidDistribution);
    CHECK_THROWS_AS(jsd({0.5, 0.5}, {0.7, 0.2}), InvalidDistribution);
}

TEST_CASE("sigmoid values") {
    CHECK(sigmoid(0.0) == doctest::Approx(0.5));
    CHECK(sigmoid(8.0) == doctest::Approx(1.0 / (1.0 + std::exp(-8.0))).epsilon(1e-12));
    CHECK(sigmoid(8.0) == doctest::Approx(0.99966).epsilon(1e-4));
    CHECK(sigmoid(-12.0) == doctest::Approx(std::exp(-12.0) / (1.0 + std::exp(-12.0))));
    CHECK(sigmoid(-12.0) == doctest::Approx(6.14e-6).epsilon(1e-2));
    CHECK(sigmoid(-800.0) == doctest::Approx(0.0));
    CHECK(sigmoid(800.0) == doctest::Approx(1.0));
}

TEST_CASE("sigmoid antisymmetry") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> uni(-40.0, 40.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double x = uni(rng);
        CHECK(std::abs(sigmoid(-x) - (1.0 - sigmoid(x))) < 1e-12);
    }
    CHECK(std::abs(sigmoid(0.5) - sigmoid(0.4)) > 0.0);  // strictly increasing spot check
}

TEST_CASE("l2 norm") {
    CHECK(l2_norm({0.0, 0.0, 0.0}) == doctest::Approx(0.0));
    CHECK(l2_norm({3.0, 4.0}) == doctest::Approx(5.0));
    CHECK(l2_norm({1.0, 1.0, 1.0, 1.0}) == doctest::Approx(2.0));
}

TEST_CASE("probability validation") {
    CHECK(is_valid_probability({0.25, 0.75}));
    CHECK_FALSE(is_valid_probability({0.5, 0.6}));
    CHECK_FALSE(is_valid_probability({-0.1, 1.1}));
    CHECK_FALSE(is_valid_probability({}));
    CHECK_THROWS_AS(validate_probability({0.2, 0.2}), InvalidDistribution);
}

TEST_CASE("normalized") {
    const FeatureVector v = normalized({3.0, 4.0, 0.0});
    CHECK(v[0] == doctest::Approx(0.6));
    CHECK(v[1] == doctest::Approx(0.8));
    CHECK_THROWS_AS(normalized({0.0, 0.0}), DegenerateVector);
}
