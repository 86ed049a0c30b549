#include "ace/numerics.hpp"

#include <algorithm>
#include <cmath>

namespace ace {

void validate_logits(const LogitVector& logits) {
    if (logits.empty()) {
        throw InvalidLogits("empty logit vector");
    }
    for (double v : logits) {
        if (!std::isfinite(v)) {
            throw InvalidLogits("non-finite logit entry");
        }
    }
}

bool is_valid_probability(const ProbVector& p) {
    if (p.empty()) {
        return false;
    }
    double sum = 0.0;
    for (double v : p) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            return false;
        }
        sum += v;
    }
    return std::abs(sum - 1.0) <= kProbSumTolerance;
}

void validate_probability(const ProbVector& p) {
    if (!is_valid_probability(p)) {
        throw InvalidDistribution("not a probability vector");
    }
}

ProbVector softmax(const LogitVector& logits, double temperature) {
    validate_logits(logits);
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw InvalidParameter("softmax temperature must be > 0");
    }
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    ProbVector out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        const double d = (logits[i] - max_logit) / temperature;
        // exp underflows to zero below ~-745 anyway; skipping the call keeps
        // heavily penalized entries off the subnormal slow path.
        out[i] = d < -745.0 ? 0.0 : std::exp(d);
        sum += out[i];
    }
    for (double& v : out) {
        v /= sum;
    }
    return out;
}

double dot(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size()) {
        throw ShapeError("dot: dimension mismatch");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double l2_norm(const FeatureVector& v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

FeatureVector normalized(const FeatureVector& v) {
    const double n = l2_norm(v);
    if (n <= 0.0) {
        throw DegenerateVector("cannot normalize zero vector");
    }
    FeatureVector out(v);
    for (double& x : out) {
        x /= n;
    }
    return out;
}

double cosine_similarity(const FeatureVector& a, const FeatureVector& b) {
    if (a.size() != b.size()) {
        throw ShapeError("cosine_similarity: dimension mismatch");
    }
    const double na = l2_norm(a);
    const double nb = l2_norm(b);
    if (na <= 0.0 || nb <= 0.0) {
        throw DegenerateVector("cosine_similarity: zero-norm vector");
    }
    const double c = dot(a, b) / (na * nb);
    return std::clamp(c, -1.0, 1.0);
}

double jsd(const ProbVector& p, const ProbVector& q) {
    if (p.size() != q.size()) {
        throw ShapeError("jsd: length mismatch");
    }
    validate_probability(p);
    validate_probability(q);
    // Single fused pass over both KL terms against the midpoint, with the
    // 0*log(0) = 0 convention. The midpoint is zero only where both inputs
    // are, so neither branch divides by zero.
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) {
            d += 0.5 * p[i] * std::log(p[i] / m);
        }
        if (q[i] > 0.0) {
            d += 0.5 * q[i] * std::log(q[i] / m);
        }
    }
    // Guard rounding drift at the boundaries.
    return std::clamp(d, 0.0, kLn2);
}

double sigmoid(double x) {
    if (!std::isfinite(x)) {
        throw InvalidParameter("sigmoid: non-finite input");
    }
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace ace
