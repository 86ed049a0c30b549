#pragma once

#include <vector>

#include "ace/numerics.hpp"

namespace ace {

// Token-indexed feature rows; row 0 is the global feature.
struct FeatureSequence {
    std::vector<FeatureVector> tokens;

    std::size_t token_count() const { return tokens.size(); }
    int dim() const { return tokens.empty() ? 0 : static_cast<int>(tokens.front().size()); }
    const FeatureVector& global() const { return tokens.front(); }

    bool operator==(const FeatureSequence&) const = default;
};

// Per-token soft gate in [0,1]; value[0] is pinned to 1.0 (global protection).
struct GateMask {
    std::vector<double> values;
    double kappa = 0.0;
    double tau = 0.0;
};

// Token-wise rigidity: S(i) = CosSim(f_raw(i), f_cf(i)), including token 0.
// Both sequences must share token count and dimension.
std::vector<double> rigidity_scores(const FeatureSequence& f_raw, const FeatureSequence& f_cf);

// M(i) = sigmoid(kappa * (S(i) - tau)) for i >= 1; M(0) is forced to 1.0.
GateMask gate_mask(const std::vector<double>& scores, double kappa, double tau);

// V_iso: row i of f_raw scaled by mask value i.
FeatureSequence isolate(const FeatureSequence& f_raw, const GateMask& mask);

}  // namespace ace
