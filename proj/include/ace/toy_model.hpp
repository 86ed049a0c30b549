#pragma once

#include <array>
#include <string>
#include <vector>

#include "ace/model.hpp"

namespace ace {

// Deterministic toy multimodal transformer. It is a theory instrument, not a
// language model: every constant below exists to make the buffer/saturation
// propositions constructible and the game-decoding equilibrium falsifiable at
// desk scale.
//
// Vision side: the image is cut into a grid; per-cell statistics (mean RGB,
// intensity variance, a 27-bin quantized-color histogram, contrast against
// the global mean) pass through a seeded fixed linear map into D dims.
// Designated low-variance background cells accumulate +g*u per encoder layer
// (register-driven norm inflation) plus a small narrative-bias component, so
// they become the high-norm buffer rows the decoder's attention sinks onto.
// Row 0 is the global feature, the mean of all cell features before inflation.
//
// Language side: a block is h' = h + attention_context(h, visual) + b*n_bias;
// the softmax attention is the block nonlinearity. Fact tokens read bound
// palette concepts, prior tokens read the narrative-bias direction, so the
// inertia knob b alone moves the decode between factual and false equilibria.
//
// Palette roles: 16 anchor colors bind fact tokens (the first few carry a
// prior-correlated component, making them "popular" objects); 6 pastel mix
// colors form the counter-commonsense palette used by library patches - they
// map to features aligned with the register direction and the narrative-bias
// direction, which is what makes the CF stream amplify prior-driven logits.
struct ToyModelConfig {
    std::uint64_t seed = 42;
    int layers = 8;           // decoder depth L
    int encoder_layers = 4;   // inflation accumulation depth
    int grid_rows = 4;
    int grid_cols = 4;
    int feature_dim = 32;
    int vocab_size = 64;      // fixed partition, see token id helpers below
    int register_count = 2;

    double register_gain = 7.0;        // g, per encoder layer, along u
    double register_bias_gain = 0.02;  // per encoder layer, along n_bias (buffered inertia)
    double inertia_gain = 0.0;         // b, per decoder layer; the false-equilibrium knob

    double query_gain = 3.0;
    double readout_gain = 5.0;
    double attn_score_cap = 3.5;  // block-level attention logit soft-cap
    double sink_affinity = 0.4;   // fixed query component along the register direction

    double fact_gain = 3.2;       // palette concept magnitude
    double popular_gain = 0.35;   // prior correlation of the most popular fact anchor
    double lib_bias_gain = 7.0;   // counter-commonsense palette -> n_bias
    double lib_register_gain = 1.6;  // counter-commonsense palette -> u
    double neutral_gain = 0.3;
    double mean_gain = 0.25;
    double contrast_gain = 4.0;   // content salience -> probe direction
    double variance_gain = 0.6;
    double variance_scale = 900.0;

    double emb_ask_gain = 1.0;
    double emb_obj_gain = 0.4;
    double emb_prior_gain = 0.3;
    double eos_drive = 1.0;
    double history_gain = 0.35;
    double eos_scale = 0.8;
    double answer_threshold = 1.0;   // "no" evidence level, in feature units
    double prior_flavor_gain = 0.08;
    double reserved_gain = 0.05;
    double repeat_penalty = 80.0;  // history conditioning: emitted content stays said

    void validate() const;
};

void save_toy_config(const ToyModelConfig& cfg, const std::string& path);
ToyModelConfig load_toy_config(const std::string& path);

// Fixed vocabulary partition (vocab_size must be 64).
namespace vocab {
inline constexpr int kFactCount = 16;
inline constexpr int kReservedCount = 27;
inline constexpr int kPriorCount = 16;
inline constexpr int kFactBegin = 0;
inline constexpr int kReservedBegin = kFactBegin + kFactCount;      // 16
inline constexpr int kPriorBegin = kReservedBegin + kReservedCount;  // 43
inline constexpr int kAsk = kPriorBegin + kPriorCount;               // 59
inline constexpr int kDescribe = kAsk + 1;                           // 60
inline constexpr int kYes = kDescribe + 1;                           // 61
inline constexpr int kNo = kYes + 1;                                 // 62
inline constexpr int kEos = kNo + 1;                                 // 63
inline constexpr int kSize = kEos + 1;

bool is_fact(int t);
bool is_reserved(int t);
bool is_prior(int t);
bool is_object(int t);  // fact or prior: tokens CHAIR counts as object mentions
std::string token_name(int t);
int token_from_name(const std::string& name);
}  // namespace vocab

class ToyModel final : public ModelAdapter {
  public:
    explicit ToyModel(const ToyModelConfig& cfg);

    FeatureSequence encode(const ImageBuffer& image) const override;
    int layer_count() const override { return cfg_.layers; }
    int vocab_size() const override { return cfg_.vocab_size; }
    int eos_token() const override { return vocab::kEos; }

    PromptContext make_context(const std::vector<int>& prompt,
                               const std::vector<int>& generated) const override;
    LayerState initial_state(const PromptContext& ctx) const override;
    LayerState step(const LayerState& prev, int layer,
                    const FeatureSequence& visual) const override;
    LogitVector project(const LayerState& final_state, const PromptContext& ctx) const override;
    LogitVector lens_logits(const FeatureVector& h, const PromptContext& ctx) const override;

    const ToyModelConfig& config() const { return cfg_; }
    const FeatureVector& register_direction() const { return u_; }
    const FeatureVector& bias_direction() const { return n_bias_; }
    const FeatureVector& probe_direction() const { return p_dir_; }

    // Anchor color of a palette-bound fact token (RGB), and the six
    // counter-commonsense palette colors library assets are painted with.
    std::array<std::uint8_t, 3> fact_anchor_color(int fact_token) const;
    const std::vector<std::array<std::uint8_t, 3>>& library_palette() const {
        return lib_colors_;
    }
    std::array<std::uint8_t, 3> neutral_color(int index) const;
    int neutral_color_count() const;

    FeatureVector token_embedding(int token) const;
    FeatureVector token_readout(int token) const;

  private:
    FeatureVector cell_feature(double mean_r, double mean_g, double mean_b, double variance,
                               const std::array<double, 27>& hist, double contrast) const;

    ToyModelConfig cfg_;
    FeatureVector u_;       // register direction
    FeatureVector n_bias_;  // narrative inertia direction
    FeatureVector p_dir_;   // content probe direction
    FeatureVector d_eos_;
    std::vector<FeatureVector> concepts_;      // one per fact token
    std::vector<double> popular_;              // prior correlation per fact token
    std::vector<FeatureVector> bin_columns_;   // 27 palette-bin feature columns
    std::vector<FeatureVector> mean_dirs_;     // 3
    std::vector<FeatureVector> neutral_dirs_;  // 5
    std::vector<FeatureVector> reserved_dirs_;
    std::vector<double> prior_gains_;
    std::vector<std::array<std::uint8_t, 3>> lib_colors_;
    std::vector<int> fact_bins_;     // palette bin per fact token
    std::vector<int> lib_bins_;      // palette bins of the counter-commonsense colors
    std::vector<int> neutral_bins_;
};

// Planted false-equilibrium scenario: an image whose baseline greedy decode
// at the requested inertia gain emits a prior token while the named fact
// token stays visually grounded.
struct PlantSpec {
    int fact_token = 0;
    int prior_token = -1;  // -1 accepts whichever prior wins the baseline decode
    int subject_row = 1;
    int subject_col = 1;
    int subject_row_span = 1;
    int subject_col_span = 1;
    int background_color = 0;  // neutral palette index
    double inertia_gain = 0.2;
};

struct PlantedScenario {
    ImageBuffer image;
    BinaryMask subject_mask;
    int fact_token = 0;
    int prior_token = -1;
    std::vector<int> ground_truth;
    double inertia_gain = 0.0;
};

// Builds the image and verifies with a baseline greedy decode that the prior
// token actually wins at spec.inertia_gain; throws CannotPlant otherwise
// (also when b is too low to flip the decode away from the fact token).
PlantedScenario plant_scenario(const ToyModelConfig& cfg, const PlantSpec& spec);

}  // namespace ace
