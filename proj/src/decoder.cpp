#include "ace/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ace/features.hpp"

namespace ace {

std::vector<int> AceConfig::default_injection_band(int layers) {
    const int lo = std::max(1, static_cast<int>(std::ceil(0.375 * layers)));
    const int hi = std::min(layers, static_cast<int>(std::ceil(0.75 * layers)));
    std::vector<int> band;
    for (int l = lo; l <= hi; ++l) {
        band.push_back(l);
    }
    return band;
}

std::vector<int> AceConfig::single_layer_preset(int layers) {
    // Paper trace injects at layer 15 of 32.
    const int l = std::clamp(static_cast<int>(std::ceil(layers * 15.0 / 32.0)), 1, layers);
    return {l};
}

AceConfig AceConfig::appendix_b4_profile() {
    AceConfig cfg;
    cfg.alpha = 0.3;
    return cfg;
}

std::vector<int> AceConfig::resolved_injection_layers(int layers) const {
    return injection_layers.empty() ? default_injection_band(layers) : injection_layers;
}

void AceConfig::validate(int layers) const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw InvalidParameter("alpha must lie in [0,1]");
    }
    if (!(kappa > 0.0)) {
        throw InvalidParameter("kappa must be > 0");
    }
    if (beta < 0.0 || lambda_base < 0.0 || gamma < 0.0) {
        throw InvalidParameter("beta, lambda_base and gamma must be >= 0");
    }
    if (n_patches < 1) {
        throw InvalidParameter("n_patches must be >= 1");
    }
    if (max_new_tokens < 1) {
        throw InvalidParameter("max_new_tokens must be >= 1");
    }
    for (int l : resolved_injection_layers(layers)) {
        if (l < 1 || l > layers) {
            throw InvalidParameter("injection layer " + std::to_string(l) + " outside 1.." +
                                   std::to_string(layers));
        }
    }
}

int logit_rank(const LogitVector& logits, int token) {
    if (token < 0 || token >= static_cast<int>(logits.size())) {
        throw InvalidToken("rank query for token outside the vocabulary");
    }
    int rank = 1;
    const double v = logits[token];
    for (int j = 0; j < static_cast<int>(logits.size()); ++j) {
        if (logits[j] > v || (logits[j] == v && j < token)) {
            ++rank;
        }
    }
    return rank;
}

namespace {

int pick_greedy(const LogitVector& logits) {
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
}

int pick_sampled(const LogitVector& logits, std::mt19937_64& rng) {
    const ProbVector p = softmax(logits, 1.0);
    const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) {
            return static_cast<int>(i);
        }
    }
    return static_cast<int>(p.size()) - 1;
}

GateSummary summarize_gate(const GateMask& mask) {
    GateSummary s;
    s.values = mask.values;
    if (mask.values.empty()) {
        return s;
    }
    double sum = 0.0;
    s.min_value = mask.values.front();
    for (double v : mask.values) {
        sum += v;
        s.min_value = std::min(s.min_value, v);
        if (v < 0.5) {
            ++s.gated_below_half;
        }
    }
    s.mean_value = sum / static_cast<double>(mask.values.size());
    return s;
}

void record_layer_ranks(const ModelAdapter& adapter, const FeatureVector& h,
                        const PromptContext& ctx, const std::vector<int>& tracked,
                        TraceStep& step) {
    if (tracked.empty()) {
        return;
    }
    const LogitVector lens = adapter.lens_logits(h, ctx);
    for (int t : tracked) {
        step.layer_ranks[t].push_back(logit_rank(lens, t));
    }
}

}  // namespace

std::vector<int> decode(const ModelAdapter& adapter, const ImageBuffer& image,
                        const std::vector<int>& prompt, const AdversarialLibrary& library,
                        const AceConfig& cfg, const std::optional<BinaryMask>& subject_mask,
                        DecodingTrace* trace) {
    const int layers = adapter.layer_count();
    cfg.validate(layers);
    if (prompt.empty()) {
        throw InvalidParameter("decode: empty prompt");
    }
    if (library.objects.empty()) {
        throw EmptyLibrary("decode: empty adversarial library");
    }
    const std::vector<int> inj_layers = cfg.resolved_injection_layers(layers);
    const bool inject = cfg.alpha > 0.0 && !inj_layers.empty();
    const bool cis_active = cfg.lambda_base > 0.0;
    const bool dvs_active = cfg.beta > 0.0 || inject;
    const bool need_cf = cis_active || dvs_active;

    // Phase 1: stream construction, once per image.
    const FeatureSequence f_raw = adapter.encode(image);
    FeatureSequence f_cf;
    FeatureSequence v_iso;
    if (trace) {
        *trace = DecodingTrace{};
        trace->tracked_tokens = cfg.tracked_tokens;
    }
    if (need_cf) {
        const std::size_t chosen = select_adversarial_index(f_raw.global(), library);
        const BinaryMask background = extract_background_mask(image, subject_mask);
        const PerturbationResult pert =
            place_patches(image, background, library.objects[chosen], cfg.n_patches,
                          cfg.perturb_seed);
        f_cf = adapter.encode(pert.image_cf);
        const std::vector<double> rigidity = rigidity_scores(f_raw, f_cf);
        const GateMask mask = gate_mask(rigidity, cfg.kappa, cfg.tau);
        if (dvs_active) {
            v_iso = isolate(f_raw, mask);
        }
        if (trace) {
            trace->gate = summarize_gate(mask);
            trace->rigidity = rigidity;
            trace->source_object_id = library.objects[chosen].id;
        }
    }

    // Phase 2: autoregressive game decoding.
    std::vector<int> generated;
    std::mt19937_64 sample_rng(cfg.sample_seed);
    const bool track = trace && !cfg.tracked_tokens.empty();
    for (int step_idx = 0; step_idx < cfg.max_new_tokens; ++step_idx) {
        const PromptContext ctx = adapter.make_context(prompt, generated);
        LayerState s_raw = adapter.initial_state(ctx);
        LayerState s_cf = s_raw;
        LayerState s_iso = s_raw;
        TraceStep trace_step;
        trace_step.step = step_idx;
        for (int l = 1; l <= layers; ++l) {
            if (dvs_active) {
                s_iso = adapter.step(s_iso, l, v_iso);
            }
            if (cis_active) {
                s_cf = adapter.step(s_cf, l, f_cf);
            }
            s_raw = adapter.step(s_raw, l, f_raw);
            if (inject && std::find(inj_layers.begin(), inj_layers.end(), l) != inj_layers.end()) {
                s_raw.h = midlayer_rectify(s_raw.h, s_iso.h, cfg.alpha);
            }
            if (track) {
                record_layer_ranks(adapter, s_raw.h, ctx, cfg.tracked_tokens, trace_step);
            }
        }
        const LogitVector l_raw = adapter.project(s_raw, ctx);
        double lambda = 0.0;
        LogitVector l_final;
        if (cis_active || cfg.beta > 0.0) {
            LogitVector l_cf(l_raw.size(), 0.0);
            if (cis_active) {
                l_cf = adapter.project(s_cf, ctx);
                const ProbVector p_raw = softmax(l_raw, 1.0);
                const ProbVector p_cf = softmax(l_cf, 1.0);
                trace_step.jsd_value = jsd(p_raw, p_cf);
                lambda = dynamic_lambda(p_raw, p_cf, cfg.lambda_base, cfg.gamma);
            }
            LogitVector l_iso(l_raw.size(), 0.0);
            if (cfg.beta > 0.0) {
                l_iso = adapter.project(s_iso, ctx);
            }
            l_final = equilibrium_logits(l_raw, l_cf, l_iso, lambda, cfg.beta);
        } else {
            l_final = l_raw;
        }
        trace_step.lambda_dyn = lambda;

        const int y = cfg.mode == AceConfig::Mode::Greedy ? pick_greedy(l_final)
                                                          : pick_sampled(l_final, sample_rng);
        if (trace) {
            trace_step.chosen = y;
            for (int t : cfg.tracked_tokens) {
                trace_step.final_rank[t] = logit_rank(l_final, t);
            }
            trace->steps.push_back(std::move(trace_step));
        }
        generated.push_back(y);
        if (y == adapter.eos_token() && !cfg.ignore_eos) {
            break;
        }
    }
    return generated;
}

std::vector<int> baseline_decode(const ModelAdapter& adapter, const ImageBuffer& image,
                                 const std::vector<int>& prompt, const AceConfig& cfg,
                                 DecodingTrace* trace) {
    const int layers = adapter.layer_count();
    if (prompt.empty()) {
        throw InvalidParameter("baseline_decode: empty prompt");
    }
    const FeatureSequence f_raw = adapter.encode(image);
    if (trace) {
        *trace = DecodingTrace{};
        trace->tracked_tokens = cfg.tracked_tokens;
    }
    const bool track = trace && !cfg.tracked_tokens.empty();
    std::vector<int> generated;
    for (int step_idx = 0; step_idx < cfg.max_new_tokens; ++step_idx) {
        const PromptContext ctx = adapter.make_context(prompt, generated);
        LayerState s = adapter.initial_state(ctx);
        TraceStep trace_step;
        trace_step.step = step_idx;
        for (int l = 1; l <= layers; ++l) {
            s = adapter.step(s, l, f_raw);
            if (track) {
                record_layer_ranks(adapter, s.h, ctx, cfg.tracked_tokens, trace_step);
            }
        }
        const LogitVector logits = adapter.project(s, ctx);
        const int y = pick_greedy(logits);
        if (trace) {
            trace_step.chosen = y;
            for (int t : cfg.tracked_tokens) {
                trace_step.final_rank[t] = logit_rank(logits, t);
            }
            trace->steps.push_back(std::move(trace_step));
        }
        generated.push_back(y);
        if (y == adapter.eos_token() && !cfg.ignore_eos) {
            break;
        }
    }
    return generated;
}

}  // namespace ace
