#pragma once

#include <map>
#include <string>
#include <vector>

#include "ace/decoder.hpp"
#include "ace/scenario.hpp"

namespace ace {

// Decoder under evaluation: a model, its library, and the ACE profile.
// use_ace = false runs the greedy single-stream baseline on the same model.
struct EvalContext {
    const ModelAdapter* adapter = nullptr;
    const AdversarialLibrary* library = nullptr;
    AceConfig ace;
    bool use_ace = true;
};

std::vector<int> run_decode(const EvalContext& ctx, const Scenario& scenario,
                            const std::vector<int>& prompt);

struct SplitStats {
    int tp = 0;
    int fp = 0;
    int tn = 0;
    int fn = 0;
    int unparsable = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    int count() const { return tp + fp + tn + fn; }
};

// Confusion arithmetic with "yes" as the positive class.
SplitStats confusion_stats(const std::vector<std::pair<bool, bool>>& expected_predicted);

struct ProbeOutcome {
    std::string scenario_id;
    int object = 0;
    std::string split;
    std::string prompt_text;  // POPE wording, as logged in reports
    bool expected_yes = false;
    bool predicted_yes = false;
    bool unparsable = false;
};

struct EvalReport {
    std::map<std::string, SplitStats> splits;  // per split plus "all"
    std::vector<ProbeOutcome> outcomes;
    double chair_s = 0.0;
    double chair_i = 0.0;
    std::map<std::string, double> category_accuracy;  // MME-style grouping
    std::string mme_note;  // flags the per-category-accuracy convention
    double ms_per_token = 0.0;
    double ms_per_token_baseline = 0.0;
    double latency_ratio = 0.0;
    std::string config_echo;
};

std::string describe_config(const EvalContext& ctx);

// Yes/no probing over every scenario probe. A decode that emits neither
// answer token within the step budget counts as incorrect and is logged as
// unparsable. Results are re-derived by an independent recount on every call;
// a mismatch throws.
EvalReport pope_eval(const Suite& suite, const EvalContext& ctx);

struct CaptionRecord {
    std::string scenario_id;
    std::vector<int> mentioned;  // object tokens, multiset semantics
};

// Caption decode over the suite ("describe" prompt); mentions are the emitted
// object tokens in order.
std::vector<CaptionRecord> caption_suite(const Suite& suite, const EvalContext& ctx);

// CHAIR_I = hallucinated instances / mentioned instances,
// CHAIR_S = captions with at least one hallucination / captions.
std::pair<double, double> chair_eval(const std::vector<CaptionRecord>& captions,
                                     const Suite& suite);

// Per-category probe accuracy using scenario category tags.
std::map<std::string, double> mme_eval(const Suite& suite, const EvalContext& ctx);

// Pinned trace CSV: step,layer,token_id,rank,jsd,lambda_dyn,chosen.
// Layers 1..L are raw-stream logit-lens ranks, layer -1 is the
// post-equilibrium rank. `chosen` is the token emitted at that step.
std::string trace_to_csv(const DecodingTrace& trace);

struct LatencyResult {
    double ms_per_token_ace = 0.0;
    double ms_per_token_baseline = 0.0;
    double ratio = 0.0;
};

// Median per-token wall time over `repetitions` full-suite passes; the warm-up
// pass is excluded, generation length is fixed (EOS ignored) so both decoders
// do identical token counts. Strictly single-threaded.
LatencyResult latency_bench(const Suite& suite, const EvalContext& ace_ctx,
                            const EvalContext& baseline_ctx, int repetitions);

struct SweepCell {
    double lambda_base = 0.0;
    double beta = 0.0;
    double alpha = 0.0;
    std::string band;
    double hallucination_rate = 0.0;  // suite CHAIR_S
    double pope_accuracy = 0.0;
    bool failed = false;
};

std::vector<SweepCell> sweep_lambda_beta(const Suite& suite, const EvalContext& base_ctx,
                                         const std::vector<double>& lambdas,
                                         const std::vector<double>& betas);

// band is one of early | mid | late.
std::vector<SweepCell> sweep_alpha_depth(const Suite& suite, const EvalContext& base_ctx,
                                         const std::vector<double>& alphas,
                                         const std::vector<std::string>& bands);

std::vector<int> band_layers(const std::string& band, int layers);

std::string sweep_to_csv(const std::vector<SweepCell>& cells);

struct AblationComponents {
    bool cis = true;
    bool dvs = true;
    bool midlayer = true;
};

// Table-4 style component toggles: CIS off forces lambda_base to 0, DVS off
// forces beta to 0 and removes injection, MidLayer off removes injection.
AceConfig apply_ablation(const AceConfig& cfg, const AblationComponents& components);

EvalReport ablate_one(const Suite& suite, const EvalContext& base_ctx,
                      const AblationComponents& components);

// Baseline, w/o CIS, w/o DVS, w/o MidLayer, full — keyed by those names.
std::map<std::string, EvalReport> ablate_all(const Suite& suite, const EvalContext& base_ctx);

std::string report_to_json(const EvalReport& report);

}  // namespace ace
