#pragma once

#include <cstddef>
#include <vector>

#include "ace/errors.hpp"

namespace ace {

// All probability work is done in natural log, 64-bit floats throughout.
// 0*log(0) is taken as 0.
inline constexpr double kProbSumTolerance = 1e-9;
inline constexpr double kLn2 = 0.6931471805599453;

using LogitVector = std::vector<double>;
using ProbVector = std::vector<double>;
using FeatureVector = std::vector<double>;

// Throws InvalidLogits unless every entry is finite and the vector is non-empty.
void validate_logits(const LogitVector& logits);

// Throws InvalidDistribution unless entries are in [0,1] and sum to 1 within
// kProbSumTolerance.
void validate_probability(const ProbVector& p);

bool is_valid_probability(const ProbVector& p);

// Max-subtracted softmax at the given temperature. temperature must be > 0.
ProbVector softmax(const LogitVector& logits, double temperature = 1.0);

// Clamped to [-1, 1]; both vectors must be same-dimension and nonzero.
double cosine_similarity(const FeatureVector& a, const FeatureVector& b);

// Jensen-Shannon divergence against the midpoint M = (p+q)/2, natural log,
// so the range is [0, ln 2].
double jsd(const ProbVector& p, const ProbVector& q);

// Numerically saturating logistic; never overflows.
double sigmoid(double x);

double l2_norm(const FeatureVector& v);

double dot(const FeatureVector& a, const FeatureVector& b);

// v scaled to unit L2 norm; throws DegenerateVector on a zero vector.
FeatureVector normalized(const FeatureVector& v);

}  // namespace ace
