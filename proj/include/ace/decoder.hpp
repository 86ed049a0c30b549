#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ace/game_math.hpp"
#include "ace/library.hpp"
#include "ace/model.hpp"
#include "ace/perturb.hpp"

namespace ace {

struct AceConfig {
    double alpha = 0.2;
    std::vector<int> injection_layers;  // empty means: derive the default band from L
    double kappa = 20.0;
    double tau = 0.6;
    double beta = 0.4;
    double lambda_base = 1.0;
    double gamma = 100.0;
    int n_patches = 2;
    int max_new_tokens = 512;
    enum class Mode { Greedy, Sample };
    Mode mode = Mode::Greedy;
    std::uint64_t sample_seed = 0;
    std::uint64_t perturb_seed = 7;  // Phase-1 patch placement seed
    bool ignore_eos = false;         // run to max_new_tokens (latency benches)
    std::vector<int> tracked_tokens;

    // Proportional mapping of the paper band (layers 12..24 of 32):
    // ceil(0.375*L) .. ceil(0.75*L).
    static std::vector<int> default_injection_band(int layers);
    // Single mid-layer preset used for rank-trace reproduction.
    static std::vector<int> single_layer_preset(int layers);
    // The appendix hyperparameter profile differs only in alpha = 0.3.
    static AceConfig appendix_b4_profile();

    std::vector<int> resolved_injection_layers(int layers) const;
    void validate(int layers) const;
};

struct GateSummary {
    double min_value = 1.0;
    double mean_value = 1.0;
    std::size_t gated_below_half = 0;
    std::vector<double> values;
};

struct TraceStep {
    int step = 0;
    double jsd_value = 0.0;
    double lambda_dyn = 0.0;
    int chosen = -1;
    // tracked token -> rank per raw-stream layer (index 0 = layer 1)
    std::map<int, std::vector<int>> layer_ranks;
    // tracked token -> rank under the post-equilibrium logits
    std::map<int, int> final_rank;
};

struct DecodingTrace {
    std::vector<TraceStep> steps;
    GateSummary gate;
    std::vector<double> rigidity;
    std::string source_object_id;
    std::vector<int> tracked_tokens;
};

// Rank of `token` under `logits`: 1 + number of strictly greater entries,
// ties broken toward lower indices.
int logit_rank(const LogitVector& logits, int token);

// Full ACE decode: Phase 1 (encode, farthest-neighbor selection, counter-
// commonsense compositing, rigidity gating) exactly once per image, then the
// three-stream autoregressive game loop. subject_mask, when given, overrides
// the unsupervised background extraction. trace is optional.
std::vector<int> decode(const ModelAdapter& adapter, const ImageBuffer& image,
                        const std::vector<int>& prompt, const AdversarialLibrary& library,
                        const AceConfig& cfg,
                        const std::optional<BinaryMask>& subject_mask = std::nullopt,
                        DecodingTrace* trace = nullptr);

// Greedy single-stream baseline; shares the encode path with decode() so
// latency ratios are like-for-like. Records per-layer ranks when given a trace.
std::vector<int> baseline_decode(const ModelAdapter& adapter, const ImageBuffer& image,
                                 const std::vector<int>& prompt, const AceConfig& cfg,
                                 DecodingTrace* trace = nullptr);

}  // namespace ace
