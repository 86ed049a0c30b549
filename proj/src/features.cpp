#include "ace/features.hpp"

#include <cmath>

namespace ace {

std::vector<double> rigidity_scores(const FeatureSequence& f_raw, const FeatureSequence& f_cf) {
    if (f_raw.token_count() == 0 || f_raw.token_count() != f_cf.token_count() ||
        f_raw.dim() != f_cf.dim()) {
        throw ShapeError("rigidity_scores: sequences must share shape");
    }
    std::vector<double> scores(f_raw.token_count());
    for (std::size_t i = 0; i < f_raw.token_count(); ++i) {
        scores[i] = cosine_similarity(f_raw.tokens[i], f_cf.tokens[i]);
    }
    return scores;
}

GateMask gate_mask(const std::vector<double>& scores, double kappa, double tau) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw InvalidParameter("gate_mask: kappa must be > 0");
    }
    GateMask mask;
    mask.kappa = kappa;
    mask.tau = tau;
    mask.values.resize(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        mask.values[i] = sigmoid(kappa * (scores[i] - tau));
    }
    if (!mask.values.empty()) {
        mask.values[0] = 1.0;  // global protection
    }
    return mask;
}

FeatureSequence isolate(const FeatureSequence& f_raw, const GateMask& mask) {
    if (mask.values.size() != f_raw.token_count()) {
        throw ShapeError("isolate: mask length does not match token count");
    }
    FeatureSequence out = f_raw;
    for (std::size_t i = 0; i < out.tokens.size(); ++i) {
        for (double& x : out.tokens[i]) {
            x *= mask.values[i];
        }
    }
    return out;
}

}  // namespace ace
