#pragma once

#include <vector>

#include "ace/numerics.hpp"

namespace ace {

// (1 - alpha) * h_raw + alpha * h_iso, elementwise. alpha must lie in [0,1].
FeatureVector midlayer_rectify(const FeatureVector& h_raw_row, const FeatureVector& h_iso_row,
                               double alpha);
std::vector<FeatureVector> midlayer_rectify(const std::vector<FeatureVector>& h_raw_rows,
                                            const std::vector<FeatureVector>& h_iso_rows,
                                            double alpha);

// lambda_base * exp(-gamma * JSD(p_raw || p_cf)); maximal when the output
// distribution ignores the perturbation.
double dynamic_lambda(const ProbVector& p_raw, const ProbVector& p_cf, double lambda_base,
                      double gamma);

// L_raw - lambda * L_cf + beta * L_iso, elementwise.
LogitVector equilibrium_logits(const LogitVector& l_raw, const LogitVector& l_cf,
                               const LogitVector& l_iso, double lambda, double beta);

}  // namespace ace
