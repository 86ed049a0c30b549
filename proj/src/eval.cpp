#include "ace/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ace/toy_model.hpp"

using nlohmann::json;

namespace ace {

std::vector<int> run_decode(const EvalContext& ctx, const Scenario& scenario,
                            const std::vector<int>& prompt) {
    if (ctx.adapter == nullptr) {
        throw InvalidParameter("eval context has no model");
    }
    if (ctx.use_ace) {
        if (ctx.library == nullptr) {
            throw InvalidParameter("eval context has no library");
        }
        return decode(*ctx.adapter, scenario.image, prompt, *ctx.library, ctx.ace,
                      scenario.subject_mask);
    }
    return baseline_decode(*ctx.adapter, scenario.image, prompt, ctx.ace);
}

SplitStats confusion_stats(const std::vector<std::pair<bool, bool>>& expected_predicted) {
    SplitStats s;
    for (const auto& [expected, predicted] : expected_predicted) {
        if (expected && predicted) {
            ++s.tp;
        } else if (!expected && predicted) {
            ++s.fp;
        } else if (!expected && !predicted) {
            ++s.tn;
        } else {
            ++s.fn;
        }
    }
    const int n = s.count();
    s.accuracy = n == 0 ? 0.0 : static_cast<double>(s.tp + s.tn) / n;
    s.precision = (s.tp + s.fp) == 0 ? 0.0 : static_cast<double>(s.tp) / (s.tp + s.fp);
    s.recall = (s.tp + s.fn) == 0 ? 0.0 : static_cast<double>(s.tp) / (s.tp + s.fn);
    s.f1 = (s.precision + s.recall) == 0.0
               ? 0.0
               : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

std::string describe_config(const EvalContext& ctx) {
    std::ostringstream os;
    os << (ctx.use_ace ? "ace" : "baseline") << " alpha=" << ctx.ace.alpha
       << " kappa=" << ctx.ace.kappa << " tau=" << ctx.ace.tau << " beta=" << ctx.ace.beta
       << " lambda_base=" << ctx.ace.lambda_base << " gamma=" << ctx.ace.gamma
       << " n=" << ctx.ace.n_patches;
    os << " inject=";
    const auto layers = ctx.ace.resolved_injection_layers(
        ctx.adapter ? ctx.adapter->layer_count() : 8);
    for (std::size_t i = 0; i < layers.size(); ++i) {
        os << (i ? "," : "") << layers[i];
    }
    return os.str();
}

namespace {

std::string pope_prompt_text(int object) {
    return "Is there a " + vocab::token_name(object) + " in this image? Please answer yes or no.";
}

// Independent recount used as the always-on self check.
void self_check_splits(const EvalReport& report) {
    std::map<std::string, std::array<int, 4>> tally;  // tp, fp, tn, fn
    std::map<std::string, int> unparsable;
    for (const ProbeOutcome& o : report.outcomes) {
        for (const std::string& key : {o.split, std::string("all")}) {
            auto& t = tally[key];
            if (o.expected_yes && o.predicted_yes) {
                t[0] += 1;
            }
            if (!o.expected_yes && o.predicted_yes) {
                t[1] += 1;
            }
            if (!o.expected_yes && !o.predicted_yes) {
                t[2] += 1;
            }
            if (o.expected_yes && !o.predicted_yes) {
                t[3] += 1;
            }
            if (o.unparsable) {
                unparsable[key] += 1;
            }
        }
    }
    for (const auto& [key, stats] : report.splits) {
        const auto& t = tally[key];
        const int n = t[0] + t[1] + t[2] + t[3];
        if (stats.tp != t[0] || stats.fp != t[1] || stats.tn != t[2] || stats.fn != t[3] ||
            stats.count() != n || stats.unparsable != unparsable[key]) {
            throw Error("pope_eval self-check failed for split '" + key + "'");
        }
        const double acc = n == 0 ? 0.0 : static_cast<double>(t[0] + t[2]) / n;
        if (std::abs(stats.accuracy - acc) > 1e-12) {
            throw Error("pope_eval self-check failed: accuracy mismatch in '" + key + "'");
        }
    }
}

}  // namespace

EvalReport pope_eval(const Suite& suite, const EvalContext& ctx) {
    if (suite.scenarios.empty()) {
        throw EmptyEval("pope_eval: empty suite");
    }
    verify_suite(suite);
    EvalReport report;
    report.config_echo = describe_config(ctx);
    std::map<std::string, std::vector<std::pair<bool, bool>>> pairs;
    std::map<std::string, int> unparsable;
    for (const Scenario& sc : suite.scenarios) {
        for (const Probe& probe : sc.probes) {
            const std::vector<int> prompt = {vocab::kAsk, probe.object};
            AceConfig probe_cfg = ctx.ace;
            probe_cfg.max_new_tokens = std::min(probe_cfg.max_new_tokens, 8);
            EvalContext probe_ctx = ctx;
            probe_ctx.ace = probe_cfg;
            const std::vector<int> tokens = run_decode(probe_ctx, sc, prompt);

            ProbeOutcome outcome;
            outcome.scenario_id = sc.id;
            outcome.object = probe.object;
            outcome.split = probe.split;
            outcome.prompt_text = pope_prompt_text(probe.object);
            outcome.expected_yes = probe.expected_yes;
            // The answer is the first emitted yes/no token.
            outcome.unparsable = true;
            for (int t : tokens) {
                if (t == vocab::kYes || t == vocab::kNo) {
                    outcome.predicted_yes = t == vocab::kYes;
                    outcome.unparsable = false;
                    break;
                }
            }
            if (outcome.unparsable) {
                // Counted as incorrect: predict the opposite of the expectation.
                outcome.predicted_yes = !outcome.expected_yes;
            }
            for (const std::string& key : {outcome.split, std::string("all")}) {
                pairs[key].push_back({outcome.expected_yes, outcome.predicted_yes});
                if (outcome.unparsable) {
                    unparsable[key] += 1;
                }
            }
            report.outcomes.push_back(std::move(outcome));
        }
    }
    for (const auto& [key, pv] : pairs) {
        SplitStats stats = confusion_stats(pv);
        stats.unparsable = unparsable[key];
        report.splits[key] = stats;
    }
    self_check_splits(report);
    return report;
}

std::vector<CaptionRecord> caption_suite(const Suite& suite, const EvalContext& ctx) {
    std::vector<CaptionRecord> records;
    EvalContext caption_ctx = ctx;
    caption_ctx.ace.max_new_tokens = std::min(caption_ctx.ace.max_new_tokens, 12);
    for (const Scenario& sc : suite.scenarios) {
        const std::vector<int> tokens = run_decode(caption_ctx, sc, {vocab::kDescribe});
        CaptionRecord rec;
        rec.scenario_id = sc.id;
        // Reserved tokens are unbound object words; emitting one is a
        // (secondary) hallucination just like a prior-driven object.
        for (int t : tokens) {
            if (vocab::is_object(t) || vocab::is_reserved(t)) {
                rec.mentioned.push_back(t);
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

std::pair<double, double> chair_eval(const std::vector<CaptionRecord>& captions,
                                     const Suite& suite) {
    if (captions.empty()) {
        throw EmptyEval("chair_eval: no captions");
    }
    std::map<std::string, std::set<int>> truth;
    for (const Scenario& sc : suite.scenarios) {
        truth[sc.id] = std::set<int>(sc.ground_truth.begin(), sc.ground_truth.end());
    }
    std::size_t mentioned_instances = 0;
    std::size_t hallucinated_instances = 0;
    std::size_t captions_with_hallucination = 0;
    for (const CaptionRecord& rec : captions) {
        const auto it = truth.find(rec.scenario_id);
        if (it == truth.end()) {
            throw InvalidParameter("caption references unknown scenario '" + rec.scenario_id +
                                   "'");
        }
        bool any = false;
        for (int t : rec.mentioned) {
            ++mentioned_instances;
            if (!it->second.count(t)) {
                ++hallucinated_instances;
                any = true;
            }
        }
        if (any) {
            ++captions_with_hallucination;
        }
    }
    const double chair_i = mentioned_instances == 0
                               ? 0.0
                               : static_cast<double>(hallucinated_instances) / mentioned_instances;
    const double chair_s = static_cast<double>(captions_with_hallucination) / captions.size();

    // Brute-force recount as the always-on self check.
    {
        std::size_t mi = 0;
        std::size_t hi = 0;
        std::size_t cs = 0;
        for (const CaptionRecord& rec : captions) {
            std::size_t local = 0;
            for (int t : rec.mentioned) {
                mi += 1;
                if (truth.at(rec.scenario_id).find(t) == truth.at(rec.scenario_id).end()) {
                    local += 1;
                }
            }
            hi += local;
            cs += local > 0 ? 1 : 0;
        }
        const double ci2 = mi == 0 ? 0.0 : static_cast<double>(hi) / mi;
        const double cs2 = static_cast<double>(cs) / captions.size();
        if (std::abs(ci2 - chair_i) > 1e-12 || std::abs(cs2 - chair_s) > 1e-12) {
            throw Error("chair_eval self-check failed");
        }
    }
    return {chair_s, chair_i};
}

std::map<std::string, double> mme_eval(const Suite& suite, const EvalContext& ctx) {
    const EvalReport report = pope_eval(suite, ctx);
    std::map<std::string, std::set<std::string>> members;
    for (const Scenario& sc : suite.scenarios) {
        members[sc.category].insert(sc.id);
    }
    std::map<std::string, double> accuracy;
    for (const auto& [category, ids] : members) {
        int correct = 0;
        int total = 0;
        for (const ProbeOutcome& o : report.outcomes) {
            if (!ids.count(o.scenario_id)) {
                continue;
            }
            ++total;
            if (o.expected_yes == o.predicted_yes) {
                ++correct;
            }
        }
        accuracy[category] = total == 0 ? 0.0 : static_cast<double>(correct) / total;
    }
    return accuracy;
}

std::string trace_to_csv(const DecodingTrace& trace) {
    std::ostringstream os;
    os << "step,layer,token_id,rank,jsd,lambda_dyn,chosen\n";
    os.precision(12);
    for (const TraceStep& step : trace.steps) {
        for (int token : trace.tracked_tokens) {
            const auto ranks = step.layer_ranks.find(token);
            if (ranks != step.layer_ranks.end()) {
                for (std::size_t l = 0; l < ranks->second.size(); ++l) {
                    os << step.step << "," << (l + 1) << "," << token << "," << ranks->second[l]
                       << "," << step.jsd_value << "," << step.lambda_dyn << "," << step.chosen
                       << "\n";
                }
            }
            const auto fin = step.final_rank.find(token);
            if (fin != step.final_rank.end()) {
                os << step.step << ",-1," << token << "," << fin->second << "," << step.jsd_value
                   << "," << step.lambda_dyn << "," << step.chosen << "\n";
            }
        }
    }
    return os.str();
}

LatencyResult latency_bench(const Suite& suite, const EvalContext& ace_ctx,
                            const EvalContext& baseline_ctx, int repetitions) {
    if (repetitions < 5) {
        throw InvalidParameter("latency_bench: need at least 5 repetitions");
    }
    if (suite.scenarios.empty()) {
        throw EmptyEval("latency_bench: empty suite");
    }
    auto run_pass = [&suite](const EvalContext& ctx) {
        std::size_t tokens = 0;
        const auto start = std::chrono::steady_clock::now();
        for (const Scenario& sc : suite.scenarios) {
            tokens += run_decode(ctx, sc, {vocab::kDescribe}).size();
        }
        const auto stop = std::chrono::steady_clock::now();
        const double ms = std::chrono::duration<double, std::milli>(stop - start).count();
        if (tokens == 0) {
            throw EmptyEval("latency_bench: decoder produced no tokens");
        }
        return ms / static_cast<double>(tokens);
    };
    // Fixed-length generations keep the token counts identical across decoders.
    EvalContext ace = ace_ctx;
    ace.ace.ignore_eos = true;
    ace.ace.max_new_tokens = 128;
    EvalContext base = baseline_ctx;
    base.ace.ignore_eos = true;
    base.ace.max_new_tokens = 128;

    run_pass(ace);   // warm-up, excluded
    run_pass(base);  // warm-up, excluded
    std::vector<double> ace_ms;
    std::vector<double> base_ms;
    for (int r = 0; r < repetitions; ++r) {
        ace_ms.push_back(run_pass(ace));
        base_ms.push_back(run_pass(base));
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    LatencyResult result;
    result.ms_per_token_ace = median(ace_ms);
    result.ms_per_token_baseline = median(base_ms);
    result.ratio = result.ms_per_token_ace / result.ms_per_token_baseline;
    return result;
}

namespace {

SweepCell evaluate_cell(const Suite& suite, const EvalContext& ctx) {
    SweepCell cell;
    cell.lambda_base = ctx.ace.lambda_base;
    cell.beta = ctx.ace.beta;
    cell.alpha = ctx.ace.alpha;
    try {
        const auto captions = caption_suite(suite, ctx);
        const auto [cs, ci] = chair_eval(captions, suite);
        (void)ci;
        cell.hallucination_rate = cs;
        cell.pope_accuracy = pope_eval(suite, ctx).splits.at("all").accuracy;
    } catch (const Error&) {
        cell.failed = true;
    }
    return cell;
}

}  // namespace

std::vector<SweepCell> sweep_lambda_beta(const Suite& suite, const EvalContext& base_ctx,
                                         const std::vector<double>& lambdas,
                                         const std::vector<double>& betas) {
    if (lambdas.empty() || betas.empty()) {
        throw InvalidParameter("sweep grid is empty");
    }
    std::vector<SweepCell> cells;
    for (double lambda : lambdas) {
        for (double beta : betas) {
            EvalContext ctx = base_ctx;
            ctx.use_ace = true;
            ctx.ace.lambda_base = lambda;
            ctx.ace.beta = beta;
            // The lambda/beta surface isolates the final-layer game; the
            // mid-layer channel is held off so the (0,0) corner is exactly
            // the baseline decode.
            ctx.ace.alpha = 0.0;
            ctx.ace.injection_layers = {};
            cells.push_back(evaluate_cell(suite, ctx));
        }
    }
    return cells;
}

std::vector<int> band_layers(const std::string& band, int layers) {
    const int third = std::max(1, layers / 3);
    if (band == "early") {
        std::vector<int> out;
        for (int l = 1; l <= third; ++l) {
            out.push_back(l);
        }
        return out;
    }
    if (band == "mid") {
        return AceConfig::default_injection_band(layers);
    }
    if (band == "late") {
        std::vector<int> out;
        for (int l = layers - third + 1; l <= layers; ++l) {
            out.push_back(l);
        }
        return out;
    }
    throw InvalidParameter("unknown band '" + band + "'");
}

std::vector<SweepCell> sweep_alpha_depth(const Suite& suite, const EvalContext& base_ctx,
                                         const std::vector<double>& alphas,
                                         const std::vector<std::string>& bands) {
    if (alphas.empty() || bands.empty()) {
        throw InvalidParameter("sweep grid is empty");
    }
    const int layers = base_ctx.adapter ? base_ctx.adapter->layer_count() : 8;
    std::vector<SweepCell> cells;
    for (const std::string& band : bands) {
        for (double alpha : alphas) {
            EvalContext ctx = base_ctx;
            ctx.use_ace = true;
            ctx.ace.alpha = alpha;
            ctx.ace.injection_layers = band_layers(band, layers);
            SweepCell cell = evaluate_cell(suite, ctx);
            cell.band = band;
            cells.push_back(cell);
        }
    }
    return cells;
}

std::string sweep_to_csv(const std::vector<SweepCell>& cells) {
    std::ostringstream os;
    os << "lambda_base,beta,alpha,band,hallucination_rate,pope_accuracy,failed\n";
    os.precision(12);
    for (const SweepCell& c : cells) {
        os << c.lambda_base << "," << c.beta << "," << c.alpha << "," << c.band << ","
           << c.hallucination_rate << "," << c.pope_accuracy << "," << (c.failed ? 1 : 0) << "\n";
    }
    return os.str();
}

AceConfig apply_ablation(const AceConfig& cfg, const AblationComponents& components) {
    AceConfig out = cfg;
    if (!components.cis) {
        out.lambda_base = 0.0;
    }
    if (!components.dvs) {
        out.beta = 0.0;
        out.injection_layers = {};
        out.alpha = 0.0;
    }
    if (!components.midlayer) {
        out.injection_layers = {};
        out.alpha = 0.0;
    }
    return out;
}

EvalReport ablate_one(const Suite& suite, const EvalContext& base_ctx,
                      const AblationComponents& components) {
    EvalContext ctx = base_ctx;
    ctx.use_ace = components.cis || components.dvs || components.midlayer;
    ctx.ace = apply_ablation(base_ctx.ace, components);
    EvalReport report = pope_eval(suite, ctx);
    const auto captions = caption_suite(suite, ctx);
    const auto [cs, ci] = chair_eval(captions, suite);
    report.chair_s = cs;
    report.chair_i = ci;
    report.category_accuracy = mme_eval(suite, ctx);
    report.mme_note = "per-category accuracy (no composite score)";
    return report;
}

std::map<std::string, EvalReport> ablate_all(const Suite& suite, const EvalContext& base_ctx) {
    std::map<std::string, EvalReport> reports;
    reports["baseline"] = ablate_one(suite, base_ctx, {false, false, false});
    reports["wo_cis"] = ablate_one(suite, base_ctx, {false, true, true});
    reports["wo_dvs"] = ablate_one(suite, base_ctx, {true, false, false});
    reports["wo_midlayer"] = ablate_one(suite, base_ctx, {true, true, false});
    reports["full"] = ablate_one(suite, base_ctx, {true, true, true});
    return reports;
}

std::string report_to_json(const EvalReport& report) {
    json doc;
    for (const auto& [split, stats] : report.splits) {
        doc["splits"][split] = {{"tp", stats.tp},
                                {"fp", stats.fp},
                                {"tn", stats.tn},
                                {"fn", stats.fn},
                                {"unparsable", stats.unparsable},
                                {"accuracy", stats.accuracy},
                                {"precision", stats.precision},
                                {"recall", stats.recall},
                                {"f1", stats.f1}};
    }
    doc["chair_s"] = report.chair_s;
    doc["chair_i"] = report.chair_i;
    if (!report.category_accuracy.empty()) {
        doc["category_accuracy"] = report.category_accuracy;
        doc["mme_note"] = report.mme_note;
    }
    if (report.latency_ratio > 0.0) {
        doc["ms_per_token"] = report.ms_per_token;
        doc["ms_per_token_baseline"] = report.ms_per_token_baseline;
        doc["latency_ratio"] = report.latency_ratio;
    }
    doc["config"] = report.config_echo;
    json probes = json::array();
    for (const ProbeOutcome& o : report.outcomes) {
        probes.push_back({{"scenario", o.scenario_id},
                          {"object", vocab::token_name(o.object)},
                          {"split", o.split},
                          {"prompt", o.prompt_text},
                          {"expected", o.expected_yes ? "yes" : "no"},
                          {"predicted", o.predicted_yes ? "yes" : "no"},
                          {"unparsable", o.unparsable}});
    }
    doc["probes"] = std::move(probes);
    return doc.dump(2);
}

}  // namespace ace
