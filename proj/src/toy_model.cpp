#include "ace/toy_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

namespace ace {

namespace vocab {

bool is_fact(int t) { return t >= kFactBegin && t < kFactBegin + kFactCount; }
bool is_reserved(int t) { return t >= kReservedBegin && t < kReservedBegin + kReservedCount; }
bool is_prior(int t) { return t >= kPriorBegin && t < kPriorBegin + kPriorCount; }
bool is_object(int t) { return is_fact(t) || is_prior(t); }

std::string token_name(int t) {
    char buf[16];
    if (is_fact(t)) {
        std::snprintf(buf, sizeof(buf), "obj%02d", t - kFactBegin);
        return buf;
    }
    if (is_reserved(t)) {
        std::snprintf(buf, sizeof(buf), "res%02d", t - kReservedBegin);
        return buf;
    }
    if (is_prior(t)) {
        std::snprintf(buf, sizeof(buf), "prior%02d", t - kPriorBegin);
        return buf;
    }
    switch (t) {
        case kAsk:
            return "ask";
        case kDescribe:
            return "describe";
        case kYes:
            return "yes";
        case kNo:
            return "no";
        case kEos:
            return "eos";
        default:
            throw InvalidToken("token id out of range: " + std::to_string(t));
    }
}

int token_from_name(const std::string& name) {
    for (int t = 0; t < kSize; ++t) {
        if (token_name(t) == name) {
            return t;
        }
    }
    // Fall back to a numeric id.
    try {
        std::size_t pos = 0;
        const int t = std::stoi(name, &pos);
        if (pos == name.size() && t >= 0 && t < kSize) {
            return t;
        }
    } catch (const std::exception&) {
    }
    throw InvalidToken("unknown token '" + name + "'");
}

}  // namespace vocab

namespace {

constexpr double kTwoPi = 6.283185307179586;

// Deterministic Box-Muller gaussian over mt19937_64; std::normal_distribution
// is implementation-defined, this is not.
class SeededGaussian {
  public:
    explicit SeededGaussian(std::uint64_t seed) : rng_(seed) {}

    double uniform() { return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53; }

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        have_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

  private:
    std::mt19937_64 rng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

FeatureVector random_unit(SeededGaussian& g, int dim) {
    FeatureVector v(dim);
    for (double& x : v) {
        x = g();
    }
    return normalized(v);
}

void axpy(FeatureVector& y, double a, const FeatureVector& x) {
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] += a * x[i];
    }
}

// Orthonormal frame spanned by `count` seeded gaussian draws.
std::vector<FeatureVector> orthonormal_frame(SeededGaussian& g, int count, int dim) {
    std::vector<FeatureVector> frame;
    frame.reserve(count);
    while (static_cast<int>(frame.size()) < count) {
        FeatureVector v(dim);
        for (double& x : v) {
            x = g();
        }
        for (const FeatureVector& b : frame) {
            axpy(v, -dot(v, b), b);
        }
        if (l2_norm(v) < 1e-6) {
            continue;  // essentially colinear draw; retry
        }
        frame.push_back(normalized(v));
    }
    return frame;
}

FeatureVector complement_unit(SeededGaussian& g, int dim, const std::vector<FeatureVector>& core) {
    for (;;) {
        FeatureVector v(dim);
        for (double& x : v) {
            x = g();
        }
        for (const FeatureVector& b : core) {
            axpy(v, -dot(v, b), b);
        }
        if (l2_norm(v) > 1e-6) {
            return normalized(v);
        }
    }
}

int quantize_channel(double v) { return v < 85.0 ? 0 : (v < 170.0 ? 1 : 2); }

std::uint8_t level_center(int q) { return q == 0 ? 42 : (q == 1 ? 127 : 212); }

std::array<std::uint8_t, 3> bin_color(int bin) {
    return {level_center(bin / 9), level_center((bin / 3) % 3), level_center(bin % 3)};
}

// Palette bin roles (bin = 9*qr + 3*qg + qb over levels {0,1,2}).
constexpr std::array<int, 16> kFactBins = {2, 6, 18, 8, 20, 24, 5, 7, 11, 15, 19, 21, 4, 10, 12, 1};
constexpr std::array<int, 6> kLibBins = {14, 16, 22, 17, 23, 25};
constexpr std::array<int, 5> kNeutralBins = {0, 13, 26, 3, 9};

}  // namespace

void ToyModelConfig::validate() const {
    if (layers < 2 || encoder_layers < 1 || grid_rows < 1 || grid_cols < 1) {
        throw InvalidParameter("toy config: bad layer/grid counts");
    }
    if (feature_dim < 24) {
        throw InvalidParameter("toy config: feature_dim must be >= 24 to host the direction frame");
    }
    if (vocab_size != vocab::kSize) {
        throw InvalidParameter("toy config: vocab_size must be 64 (fixed partition)");
    }
    if (register_count < 0 || register_count > grid_rows * grid_cols) {
        throw InvalidParameter("toy config: register_count out of range");
    }
    if (!(register_gain > 0.0) || inertia_gain < 0.0) {
        throw InvalidParameter("toy config: register_gain must be > 0 and inertia_gain >= 0");
    }
}

ToyModel::ToyModel(const ToyModelConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    const int d = cfg_.feature_dim;
    SeededGaussian gauss(cfg_.seed);

    // Core frame: u, n_bias, p_dir, d_eos, 16 concepts -- mutually orthonormal
    // so evidence channels do not leak into each other.
    std::vector<FeatureVector> core = orthonormal_frame(gauss, 4 + vocab::kFactCount, d);
    u_ = core[0];
    n_bias_ = core[1];
    p_dir_ = core[2];
    d_eos_ = core[3];
    concepts_.assign(core.begin() + 4, core.end());

    popular_.assign(vocab::kFactCount, 0.0);
    for (int i = 0; i < 5; ++i) {
        popular_[i] = cfg_.popular_gain * (1.0 - 0.15 * i);
    }

    for (int i = 0; i < 3; ++i) {
        mean_dirs_.push_back(complement_unit(gauss, d, core));
    }
    for (std::size_t i = 0; i < kNeutralBins.size(); ++i) {
        neutral_dirs_.push_back(complement_unit(gauss, d, core));
    }
    std::vector<FeatureVector> residues;
    for (std::size_t i = 0; i < kLibBins.size(); ++i) {
        residues.push_back(complement_unit(gauss, d, core));
    }
    for (int i = 0; i < vocab::kReservedCount; ++i) {
        // Complement keeps reserved readouts blind to the buffer and evidence
        // channels; their logits stay near zero on every scene.
        reserved_dirs_.push_back(complement_unit(gauss, d, core));
    }
    // A sharp leader keeps hallucinated steps peaked on one prior token,
    // which is what makes their raw/cf distributions nearly identical.
    prior_gains_.resize(vocab::kPriorCount);
    for (int j = 0; j < vocab::kPriorCount; ++j) {
        prior_gains_[j] = j == 0 ? 1.0 : 0.62 * std::pow(0.88, j - 1);
    }

    fact_bins_.assign(kFactBins.begin(), kFactBins.end());
    lib_bins_.assign(kLibBins.begin(), kLibBins.end());
    neutral_bins_.assign(kNeutralBins.begin(), kNeutralBins.end());
    for (int bin : lib_bins_) {
        lib_colors_.push_back(bin_color(bin));
    }

    // Palette-bin feature columns.
    bin_columns_.assign(27, FeatureVector(d, 0.0));
    for (int i = 0; i < vocab::kFactCount; ++i) {
        FeatureVector col(d, 0.0);
        axpy(col, cfg_.fact_gain, concepts_[i]);
        axpy(col, popular_[i], n_bias_);
        bin_columns_[fact_bins_[i]] = col;
    }
    for (std::size_t j = 0; j < lib_bins_.size(); ++j) {
        FeatureVector col(d, 0.0);
        axpy(col, cfg_.lib_bias_gain, n_bias_);
        axpy(col, cfg_.lib_register_gain, u_);
        axpy(col, 0.5, residues[j]);
        bin_columns_[lib_bins_[j]] = col;
    }
    for (std::size_t k = 0; k < neutral_bins_.size(); ++k) {
        FeatureVector col(d, 0.0);
        axpy(col, cfg_.neutral_gain, neutral_dirs_[k]);
        bin_columns_[neutral_bins_[k]] = col;
    }
}

std::array<std::uint8_t, 3> ToyModel::fact_anchor_color(int fact_token) const {
    if (!vocab::is_fact(fact_token)) {
        throw InvalidToken("not a fact token: " + std::to_string(fact_token));
    }
    return bin_color(fact_bins_[fact_token - vocab::kFactBegin]);
}

std::array<std::uint8_t, 3> ToyModel::neutral_color(int index) const {
    return bin_color(neutral_bins_[static_cast<std::size_t>(index) % neutral_bins_.size()]);
}

int ToyModel::neutral_color_count() const { return static_cast<int>(neutral_bins_.size()); }

FeatureVector ToyModel::cell_feature(double mean_r, double mean_g, double mean_b, double variance,
                                     const std::array<double, 27>& hist, double contrast) const {
    FeatureVector f(cfg_.feature_dim, 0.0);
    axpy(f, cfg_.mean_gain * (mean_r - 127.5) / 127.5, mean_dirs_[0]);
    axpy(f, cfg_.mean_gain * (mean_g - 127.5) / 127.5, mean_dirs_[1]);
    axpy(f, cfg_.mean_gain * (mean_b - 127.5) / 127.5, mean_dirs_[2]);
    for (int b = 0; b < 27; ++b) {
        if (hist[b] > 0.0) {
            axpy(f, hist[b], bin_columns_[b]);
        }
    }
    const double salience = cfg_.contrast_gain * std::min(contrast, 1.0) +
                            cfg_.variance_gain * std::min(variance / cfg_.variance_scale, 1.0);
    axpy(f, salience, p_dir_);
    return f;
}

FeatureSequence ToyModel::encode(const ImageBuffer& image) const {
    if (!image.valid() || image.width < cfg_.grid_cols || image.height < cfg_.grid_rows) {
        throw ShapeError("encode: image smaller than the visual grid");
    }
    encode_calls_.fetch_add(1);

    double gr = 0.0;
    double gg = 0.0;
    double gb = 0.0;
    const std::size_t n_px = static_cast<std::size_t>(image.width) * image.height;
    for (std::size_t i = 0; i < n_px; ++i) {
        gr += image.pixels[3 * i];
        gg += image.pixels[3 * i + 1];
        gb += image.pixels[3 * i + 2];
    }
    gr /= static_cast<double>(n_px);
    gg /= static_cast<double>(n_px);
    gb /= static_cast<double>(n_px);

    const int cells = cfg_.grid_rows * cfg_.grid_cols;
    std::vector<FeatureVector> base(cells);
    std::vector<double> cell_var(cells);
    std::vector<double> cell_contrast(cells);
    for (int r = 0; r < cfg_.grid_rows; ++r) {
        for (int c = 0; c < cfg_.grid_cols; ++c) {
            const int x0 = c * image.width / cfg_.grid_cols;
            const int x1 = (c + 1) * image.width / cfg_.grid_cols;
            const int y0 = r * image.height / cfg_.grid_rows;
            const int y1 = (r + 1) * image.height / cfg_.grid_rows;
            double sr = 0.0;
            double sg = 0.0;
            double sb = 0.0;
            double si = 0.0;
            double si2 = 0.0;
            std::array<double, 27> hist{};
            int n = 0;
            for (int y = y0; y < y1; ++y) {
                for (int x = x0; x < x1; ++x) {
                    const std::uint8_t* px = image.at(x, y);
                    sr += px[0];
                    sg += px[1];
                    sb += px[2];
                    const double intensity = (px[0] + px[1] + px[2]) / 3.0;
                    si += intensity;
                    si2 += intensity * intensity;
                    const int bin = 9 * quantize_channel(px[0]) + 3 * quantize_channel(px[1]) +
                                    quantize_channel(px[2]);
                    hist[bin] += 1.0;
                    ++n;
                }
            }
            const double mr = sr / n;
            const double mg = sg / n;
            const double mb = sb / n;
            const double mi = si / n;
            const double var = std::max(0.0, si2 / n - mi * mi);
            for (double& h : hist) {
                h /= n;
            }
            // Contrast against the global mean; 221 ~= ||(255,255,255)||/2.
            const double contrast =
                std::sqrt((mr - gr) * (mr - gr) + (mg - gg) * (mg - gg) + (mb - gb) * (mb - gb)) /
                221.0;
            const int idx = r * cfg_.grid_cols + c;
            base[idx] = cell_feature(mr, mg, mb, var, hist, contrast);
            cell_var[idx] = var;
            cell_contrast[idx] = contrast;
        }
    }

    FeatureSequence seq;
    seq.tokens.resize(cells + 1, FeatureVector(cfg_.feature_dim, 0.0));
    for (int i = 0; i < cells; ++i) {
        for (int k = 0; k < cfg_.feature_dim; ++k) {
            seq.tokens[0][k] += base[i][k] / cells;  // global = mean before inflation
        }
    }

    // Register inflation: the register_count flattest background-like cells
    // (lowest contrast, raster order on ties) accumulate +g*u plus a buffered
    // narrative-bias component per encoder layer.
    std::vector<int> candidates;
    for (int i = 0; i < cells; ++i) {
        seq.tokens[i + 1] = base[i];
        if (cell_var[i] <= 1.0 && cell_contrast[i] <= 0.35) {
            candidates.push_back(i);
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(),
                     [&](int a, int b) { return cell_contrast[a] < cell_contrast[b]; });
    if (static_cast<int>(candidates.size()) > cfg_.register_count) {
        candidates.resize(cfg_.register_count);
    }
    for (int i : candidates) {
        axpy(seq.tokens[i + 1], cfg_.encoder_layers * cfg_.register_gain, u_);
        axpy(seq.tokens[i + 1], cfg_.encoder_layers * cfg_.register_bias_gain, n_bias_);
    }
    return seq;
}

PromptContext ToyModel::make_context(const std::vector<int>& prompt,
                                     const std::vector<int>& generated) const {
    PromptContext ctx;
    ctx.prompt = prompt;
    ctx.generated = generated;
    ctx.repeat_counts.assign(cfg_.vocab_size, 0);
    for (std::size_t i = 0; i + 1 < prompt.size(); ++i) {
        if (prompt[i] == vocab::kAsk &&
            (vocab::is_fact(prompt[i + 1]) || vocab::is_reserved(prompt[i + 1]))) {
            ctx.probe_token = prompt[i + 1];
        }
    }
    for (int t : generated) {
        if (t < 0 || t >= cfg_.vocab_size) {
            throw InvalidToken("generated token out of range");
        }
        ctx.repeat_counts[t] += 1;
        if (t == vocab::kYes || t == vocab::kNo) {
            ctx.answered = true;
        }
    }
    return ctx;
}

FeatureVector ToyModel::token_embedding(int token) const {
    FeatureVector e(cfg_.feature_dim, 0.0);
    if (vocab::is_fact(token)) {
        axpy(e, cfg_.emb_obj_gain, concepts_[token - vocab::kFactBegin]);
        axpy(e, cfg_.eos_drive, d_eos_);
    } else if (vocab::is_reserved(token)) {
        axpy(e, cfg_.eos_drive, d_eos_);
    } else if (vocab::is_prior(token)) {
        axpy(e, cfg_.emb_prior_gain, n_bias_);
        axpy(e, cfg_.eos_drive, d_eos_);
    } else if (token == vocab::kAsk || token == vocab::kDescribe) {
        axpy(e, cfg_.emb_ask_gain, p_dir_);
    } else if (token == vocab::kYes || token == vocab::kNo) {
        axpy(e, 1.5 * cfg_.eos_drive, d_eos_);
    } else if (token == vocab::kEos) {
        // zero embedding
    } else {
        throw InvalidToken("embedding for out-of-range token");
    }
    return e;
}

LayerState ToyModel::initial_state(const PromptContext& ctx) const {
    LayerState s;
    s.layer = 0;
    s.h.assign(cfg_.feature_dim, 0.0);
    for (int t : ctx.prompt) {
        axpy(s.h, 1.0, token_embedding(t));
    }
    for (int t : ctx.generated) {
        axpy(s.h, cfg_.history_gain, token_embedding(t));
    }
    return s;
}

ProbVector attention_weights(const FeatureVector& q, const std::vector<FeatureVector>& keys,
                             int d) {
    if (keys.empty()) {
        throw ShapeError("attention_weights: no keys");
    }
    if (d <= 0) {
        throw InvalidParameter("attention_weights: d must be positive");
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    LogitVector scores(keys.size());
    for (std::size_t j = 0; j < keys.size(); ++j) {
        if (keys[j].size() != q.size()) {
            throw ShapeError("attention_weights: key dimension mismatch");
        }
        scores[j] = dot(q, keys[j]) * scale;
    }
    return softmax(scores, 1.0);
}

LayerState ToyModel::step(const LayerState& prev, int layer, const FeatureSequence& visual) const {
    if (layer < 1 || layer > cfg_.layers) {
        throw InvalidLayer("layer " + std::to_string(layer) + " outside 1.." +
                           std::to_string(cfg_.layers));
    }
    if (prev.layer != layer - 1) {
        throw InvalidLayer("step at layer " + std::to_string(layer) + " needs the layer " +
                           std::to_string(layer - 1) + " state");
    }
    if (visual.token_count() == 0 || visual.dim() != cfg_.feature_dim) {
        throw ShapeError("step: visual sequence has the wrong shape");
    }
    // The query reads the content subspace: the register direction is
    // projected out (buffered mass is inert to semantics) and re-enters as a
    // fixed sink affinity. Normalization keeps the score scale stable as the
    // residual stream grows; the soft-cap bounds sink dominance the way
    // attention-logit capping does in production blocks.
    FeatureVector q(prev.h);
    axpy(q, -dot(prev.h, u_), u_);
    const double hn = std::max(1.0, l2_norm(q));
    for (std::size_t i = 0; i < q.size(); ++i) {
        q[i] = cfg_.query_gain * (q[i] / hn + cfg_.sink_affinity * u_[i]);
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg_.feature_dim));
    ProbVector attn(visual.tokens.size());
    double max_score = -1e300;
    for (std::size_t j = 0; j < visual.tokens.size(); ++j) {
        double s = dot(q, visual.tokens[j]) * scale;
        if (cfg_.attn_score_cap > 0.0) {
            s = cfg_.attn_score_cap * std::tanh(s / cfg_.attn_score_cap);
        }
        attn[j] = s;
        max_score = std::max(max_score, s);
    }
    // Capped scores are finite by construction; the softmax is inlined to keep
    // the block cheap (it is the hot path of every stream).
    double denom = 0.0;
    for (double& a : attn) {
        a = std::exp(a - max_score);
        denom += a;
    }
    for (double& a : attn) {
        a /= denom;
    }

    LayerState next;
    next.layer = layer;
    next.context.assign(cfg_.feature_dim, 0.0);
    for (std::size_t j = 0; j < visual.tokens.size(); ++j) {
        axpy(next.context, attn[j], visual.tokens[j]);
    }
    next.h = prev.h;
    axpy(next.h, 1.0, next.context);
    axpy(next.h, cfg_.inertia_gain, n_bias_);
    return next;
}

FeatureVector ToyModel::token_readout(int token) const {
    FeatureVector w(cfg_.feature_dim, 0.0);
    if (vocab::is_fact(token)) {
        const int i = token - vocab::kFactBegin;
        axpy(w, 1.0, concepts_[i]);
        axpy(w, popular_[i], n_bias_);
    } else if (vocab::is_reserved(token)) {
        axpy(w, cfg_.reserved_gain, reserved_dirs_[token - vocab::kReservedBegin]);
    } else if (vocab::is_prior(token)) {
        const int j = token - vocab::kPriorBegin;
        axpy(w, prior_gains_[j], n_bias_);
        axpy(w, cfg_.prior_flavor_gain, neutral_dirs_[j % neutral_dirs_.size()]);
    } else if (token == vocab::kEos) {
        axpy(w, cfg_.eos_scale, d_eos_);
    }
    return w;
}

LogitVector ToyModel::lens_logits(const FeatureVector& h, const PromptContext& ctx) const {
    if (static_cast<int>(h.size()) != cfg_.feature_dim) {
        throw ShapeError("lens_logits: hidden state dimension mismatch");
    }
    const double nb = dot(h, n_bias_);
    LogitVector logits(cfg_.vocab_size, 0.0);
    for (int t = 0; t < cfg_.vocab_size; ++t) {
        if (vocab::is_fact(t)) {
            const int i = t - vocab::kFactBegin;
            logits[t] = cfg_.readout_gain * (dot(h, concepts_[i]) + popular_[i] * nb);
        } else if (vocab::is_reserved(t)) {
            logits[t] = cfg_.readout_gain * cfg_.reserved_gain *
                        dot(h, reserved_dirs_[t - vocab::kReservedBegin]);
        } else if (vocab::is_prior(t)) {
            const int j = t - vocab::kPriorBegin;
            logits[t] =
                cfg_.readout_gain * (prior_gains_[j] * nb +
                                     cfg_.prior_flavor_gain *
                                         dot(h, neutral_dirs_[j % neutral_dirs_.size()]));
        } else if (t == vocab::kEos) {
            logits[t] = cfg_.readout_gain * cfg_.eos_scale * dot(h, d_eos_);
        } else {
            logits[t] = -6.0;  // ask/describe and, outside probe mode, yes/no
        }
    }
    if (ctx.probe_token >= 0) {
        // The answer tokens read the probed object's evidence channel against
        // a fixed decision level.
        if (vocab::is_fact(ctx.probe_token)) {
            const int i = ctx.probe_token - vocab::kFactBegin;
            logits[vocab::kYes] = cfg_.readout_gain * (dot(h, concepts_[i]) + popular_[i] * nb);
        } else {
            logits[vocab::kYes] =
                cfg_.readout_gain * cfg_.reserved_gain *
                dot(h, reserved_dirs_[ctx.probe_token - vocab::kReservedBegin]);
        }
        logits[vocab::kNo] = cfg_.readout_gain * cfg_.answer_threshold;
        if (!ctx.answered) {
            for (int t = 0; t < cfg_.vocab_size; ++t) {
                if (t != vocab::kYes && t != vocab::kNo) {
                    logits[t] -= 12.0;  // instruction following: answer first
                }
            }
        } else {
            logits[vocab::kEos] += 12.0;  // answered; stop
        }
    }
    // Emitted content tokens are conditioned away in every stream; the
    // magnitude is large enough that no equilibrium mix resurrects them.
    bool content_emitted = false;
    for (int t = 0; t < cfg_.vocab_size; ++t) {
        if ((vocab::is_object(t) || vocab::is_reserved(t)) && ctx.repeat_counts[t] > 0) {
            logits[t] -= cfg_.repeat_penalty * ctx.repeat_counts[t];
            content_emitted = true;
        }
    }
    // Terse captioner: once a content token is out, wrapping up dominates.
    if (ctx.probe_token < 0 && content_emitted) {
        logits[vocab::kEos] += 30.0;
    }
    return logits;
}

LogitVector ToyModel::project(const LayerState& final_state, const PromptContext& ctx) const {
    if (final_state.layer != cfg_.layers) {
        throw InvalidLayer("project requires the layer-" + std::to_string(cfg_.layers) + " state");
    }
    return lens_logits(final_state.h, ctx);
}

namespace {

const std::map<std::string, double ToyModelConfig::*>& double_fields() {
    static const std::map<std::string, double ToyModelConfig::*> fields = {
        {"register_gain", &ToyModelConfig::register_gain},
        {"register_bias_gain", &ToyModelConfig::register_bias_gain},
        {"inertia_gain", &ToyModelConfig::inertia_gain},
        {"query_gain", &ToyModelConfig::query_gain},
        {"attn_score_cap", &ToyModelConfig::attn_score_cap},
        {"sink_affinity", &ToyModelConfig::sink_affinity},
        {"readout_gain", &ToyModelConfig::readout_gain},
        {"fact_gain", &ToyModelConfig::fact_gain},
        {"popular_gain", &ToyModelConfig::popular_gain},
        {"lib_bias_gain", &ToyModelConfig::lib_bias_gain},
        {"lib_register_gain", &ToyModelConfig::lib_register_gain},
        {"neutral_gain", &ToyModelConfig::neutral_gain},
        {"mean_gain", &ToyModelConfig::mean_gain},
        {"contrast_gain", &ToyModelConfig::contrast_gain},
        {"variance_gain", &ToyModelConfig::variance_gain},
        {"variance_scale", &ToyModelConfig::variance_scale},
        {"emb_ask_gain", &ToyModelConfig::emb_ask_gain},
        {"emb_obj_gain", &ToyModelConfig::emb_obj_gain},
        {"emb_prior_gain", &ToyModelConfig::emb_prior_gain},
        {"eos_drive", &ToyModelConfig::eos_drive},
        {"history_gain", &ToyModelConfig::history_gain},
        {"eos_scale", &ToyModelConfig::eos_scale},
        {"answer_threshold", &ToyModelConfig::answer_threshold},
        {"prior_flavor_gain", &ToyModelConfig::prior_flavor_gain},
        {"reserved_gain", &ToyModelConfig::reserved_gain},
        {"repeat_penalty", &ToyModelConfig::repeat_penalty},
    };
    return fields;
}

const std::map<std::string, int ToyModelConfig::*>& int_fields() {
    static const std::map<std::string, int ToyModelConfig::*> fields = {
        {"layers", &ToyModelConfig::layers},
        {"encoder_layers", &ToyModelConfig::encoder_layers},
        {"grid_rows", &ToyModelConfig::grid_rows},
        {"grid_cols", &ToyModelConfig::grid_cols},
        {"feature_dim", &ToyModelConfig::feature_dim},
        {"vocab_size", &ToyModelConfig::vocab_size},
        {"register_count", &ToyModelConfig::register_count},
    };
    return fields;
}

}  // namespace

void save_toy_config(const ToyModelConfig& cfg, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out << "# toy model configuration (key=value)\n";
    out << "seed=" << cfg.seed << "\n";
    for (const auto& [name, member] : int_fields()) {
        out << name << "=" << cfg.*member << "\n";
    }
    out.precision(17);
    for (const auto& [name, member] : double_fields()) {
        out << name << "=" << cfg.*member << "\n";
    }
}

ToyModelConfig load_toy_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    ToyModelConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line.resize(hash);
        }
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidParameter(path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        try {
            if (key == "seed") {
                cfg.seed = std::stoull(value);
            } else if (int_fields().count(key)) {
                cfg.*int_fields().at(key) = std::stoi(value);
            } else if (double_fields().count(key)) {
                cfg.*double_fields().at(key) = std::stod(value);
            } else {
                throw InvalidParameter(path + ": unknown key '" + key + "'");
            }
        } catch (const Error&) {
            throw;
        } catch (const std::exception&) {
            throw InvalidParameter(path + ":" + std::to_string(lineno) + ": bad value for " + key);
        }
    }
    cfg.validate();
    return cfg;
}

}  // namespace ace
