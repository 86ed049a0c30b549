// Development diagnostic: prints stream internals for a planted scene so the
// toy-model constants can be calibrated. Not part of the test suite.
#include <cstdio>
#include <string>

#include "ace/decoder.hpp"
#include "ace/eval.hpp"
#include "ace/scenario.hpp"
#include "ace/toy_model.hpp"

using namespace ace;

namespace {

void dump_step(const ToyModel& model, const ImageBuffer& image,
               const std::optional<BinaryMask>& mask, const AdversarialLibrary& lib,
               const AceConfig& cfg, int fact, int prior) {
    DecodingTrace trace;
    AceConfig traced = cfg;
    traced.tracked_tokens = {fact, prior};
    traced.max_new_tokens = 6;
    const auto tokens = decode(model, image, {vocab::kDescribe}, lib, traced, mask, &trace);
    std::printf("  ace tokens:");
    for (int t : tokens) {
        std::printf(" %s", vocab::token_name(t).c_str());
    }
    std::printf("\n");
    if (!trace.steps.empty()) {
        const TraceStep& s = trace.steps.front();
        std::printf("  step0 jsd=%.6f lambda=%.4f chosen=%s\n", s.jsd_value, s.lambda_dyn,
                    vocab::token_name(s.chosen).c_str());
        for (int t : traced.tracked_tokens) {
            std::printf("    token %-8s layer ranks:", vocab::token_name(t).c_str());
            for (int r : s.layer_ranks.at(t)) {
                std::printf(" %d", r);
            }
            std::printf("  final=%d\n", s.final_rank.at(t));
        }
        std::printf("  gate: min=%.4f mean=%.4f below_half=%zu\n", trace.gate.min_value,
                    trace.gate.mean_value, trace.gate.gated_below_half);
    }
}

}  // namespace

int main(int argc, char** argv) {
    double b = argc > 1 ? std::stod(argv[1]) : 0.0;
    ToyModelConfig cfg;
    cfg.inertia_gain = b;
    const ToyModel model(cfg);
    const AdversarialLibrary lib = build_fixture_library(model, 40, 99);

    // Single planted object scene.
    PlantSpec spec;
    spec.fact_token = 7;
    spec.subject_row = 1;
    spec.subject_col = 2;
    spec.inertia_gain = b;

    ImageBuffer image;
    BinaryMask mask;
    const int cell = 16;
    const auto bgc = model.neutral_color(0);
    image = ImageBuffer(cfg.grid_cols * cell, cfg.grid_rows * cell, bgc[0], bgc[1], bgc[2]);
    mask = BinaryMask(image.width, image.height, 0);
    const auto fg = model.fact_anchor_color(spec.fact_token);
    image.fill_rect(spec.subject_col * cell, spec.subject_row * cell, cell, cell, fg[0], fg[1],
                    fg[2]);
    for (int y = spec.subject_row * cell; y < (spec.subject_row + 1) * cell; ++y) {
        for (int x = spec.subject_col * cell; x < (spec.subject_col + 1) * cell; ++x) {
            mask.set(x, y, true);
        }
    }

    // Baseline decode with per-step logit snapshot.
    AceConfig ace_cfg;
    ace_cfg.max_new_tokens = 6;
    const auto base_tokens = baseline_decode(model, image, {vocab::kDescribe}, ace_cfg);
    std::printf("b=%.3f baseline tokens:", b);
    for (int t : base_tokens) {
        std::printf(" %s", vocab::token_name(t).c_str());
    }
    std::printf("\n");

    // Logit landscape at step 1.
    {
        const auto ctx = model.make_context({vocab::kDescribe}, {});
        LayerState s = model.initial_state(ctx);
        const FeatureSequence f = model.encode(image);
        for (int l = 1; l <= cfg.layers; ++l) {
            s = model.step(s, l, f);
            const double hn = l2_norm(s.h);
            std::printf("  layer %d |h|=%.3f h.u=%.3f h.nb=%.3f h.c7=%.3f h.p=%.3f\n", l, hn,
                        dot(s.h, model.register_direction()), dot(s.h, model.bias_direction()),
                        dot(s.h, model.token_readout(7)), dot(s.h, model.probe_direction()));
        }
        const auto logits = model.project(s, ctx);
        // top 8 tokens
        std::vector<int> idx(logits.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
        std::sort(idx.begin(), idx.end(), [&](int a, int bb) { return logits[a] > logits[bb]; });
        std::printf("  top logits:");
        for (int i = 0; i < 8; ++i) {
            std::printf(" %s=%.2f", vocab::token_name(idx[i]).c_str(), logits[idx[i]]);
        }
        std::printf("\n");
    }

    dump_step(model, image, mask, lib, ace_cfg, spec.fact_token, vocab::kPriorBegin);

    // Probe landscape: present and absent-popular probes.
    for (int probe : {spec.fact_token, 0}) {
        const auto ctx = model.make_context({vocab::kAsk, probe}, {});
        LayerState s = model.initial_state(ctx);
        const FeatureSequence f = model.encode(image);
        for (int l = 1; l <= cfg.layers; ++l) {
            s = model.step(s, l, f);
        }
        const auto logits = model.project(s, ctx);
        std::printf("  probe %s: yes=%.3f no=%.3f -> %s\n", vocab::token_name(probe).c_str(),
                    logits[vocab::kYes], logits[vocab::kNo],
                    logits[vocab::kYes] > logits[vocab::kNo] ? "yes" : "no");
    }
    return 0;
}
