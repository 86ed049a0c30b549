#include "ace/game_math.hpp"

#include <cmath>

namespace ace {

FeatureVector midlayer_rectify(const FeatureVector& h_raw_row, const FeatureVector& h_iso_row,
                               double alpha) {
    if (h_raw_row.size() != h_iso_row.size()) {
        throw ShapeError("midlayer_rectify: row shapes differ");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw InvalidParameter("midlayer_rectify: alpha must lie in [0,1]");
    }
    FeatureVector out(h_raw_row.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (1.0 - alpha) * h_raw_row[i] + alpha * h_iso_row[i];
    }
    return out;
}

std::vector<FeatureVector> midlayer_rectify(const std::vector<FeatureVector>& h_raw_rows,
                                            const std::vector<FeatureVector>& h_iso_rows,
                                            double alpha) {
    if (h_raw_rows.size() != h_iso_rows.size()) {
        throw ShapeError("midlayer_rectify: row counts differ");
    }
    std::vector<FeatureVector> out;
    out.reserve(h_raw_rows.size());
    for (std::size_t i = 0; i < h_raw_rows.size(); ++i) {
        out.push_back(midlayer_rectify(h_raw_rows[i], h_iso_rows[i], alpha));
    }
    return out;
}

double dynamic_lambda(const ProbVector& p_raw, const ProbVector& p_cf, double lambda_base,
                      double gamma) {
    if (lambda_base < 0.0 || gamma < 0.0) {
        throw InvalidParameter("dynamic_lambda: parameters must be >= 0");
    }
    return lambda_base * std::exp(-gamma * jsd(p_raw, p_cf));
}

LogitVector equilibrium_logits(const LogitVector& l_raw, const LogitVector& l_cf,
                               const LogitVector& l_iso, double lambda, double beta) {
    if (l_raw.size() != l_cf.size() || l_raw.size() != l_iso.size()) {
        throw ShapeError("equilibrium_logits: logit lengths differ");
    }
    LogitVector out(l_raw.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = l_raw[i] - lambda * l_cf[i] + beta * l_iso[i];
        if (!std::isfinite(out[i])) {
            throw NumericOverflow("equilibrium_logits produced a non-finite value");
        }
    }
    return out;
}

}  // namespace ace
