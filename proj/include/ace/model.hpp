#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "ace/features.hpp"
#include "ace/image.hpp"
#include "ace/numerics.hpp"

namespace ace {

// Shared decode-side view of the prompt and the history all streams append to.
struct PromptContext {
    std::vector<int> prompt;
    std::vector<int> generated;
    int probe_token = -1;            // object under a yes/no question, -1 for captions
    bool answered = false;           // a yes/no token has already been emitted
    std::vector<int> repeat_counts;  // per-token occurrence count in `generated`
};

// One decode stream's state after `layer` blocks. layer 0 is the embedding
// state; `context` is the cross-attention context that produced this state.
struct LayerState {
    int layer = 0;
    FeatureVector h;
    FeatureVector context;
};

// Scaled dot-product attention weights: softmax(q.k_j / sqrt(d)).
ProbVector attention_weights(const FeatureVector& q, const std::vector<FeatureVector>& keys,
                             int d);

// Contract the game decoder runs against. encode() is deterministic; step()
// at layer l consumes exactly the layer l-1 state; project() accepts only
// layer-L states. Implementations count encode() calls so Phase-1 accounting
// is checkable.
class ModelAdapter {
  public:
    virtual ~ModelAdapter() = default;

    virtual FeatureSequence encode(const ImageBuffer& image) const = 0;
    virtual int layer_count() const = 0;
    virtual int vocab_size() const = 0;
    virtual int eos_token() const = 0;

    virtual PromptContext make_context(const std::vector<int>& prompt,
                                       const std::vector<int>& generated) const = 0;
    virtual LayerState initial_state(const PromptContext& ctx) const = 0;
    virtual LayerState step(const LayerState& prev, int layer,
                            const FeatureSequence& visual) const = 0;
    virtual LogitVector project(const LayerState& final_state, const PromptContext& ctx) const = 0;

    // Logit-lens projection of an arbitrary-depth hidden state; used by the
    // rank tracing harness only. project() remains strict about the layer.
    virtual LogitVector lens_logits(const FeatureVector& h, const PromptContext& ctx) const = 0;

    std::uint64_t encode_calls() const { return encode_calls_.load(); }
    void reset_encode_calls() const { encode_calls_.store(0); }

  protected:
    mutable std::atomic<std::uint64_t> encode_calls_{0};
};

}  // namespace ace
