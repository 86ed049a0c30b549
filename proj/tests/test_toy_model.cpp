#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include <doctest.h>

#include "ace/scenario.hpp"
#include "ace/toy_model.hpp"

using namespace ace;

namespace {

ImageBuffer single_object_scene(const ToyModel& model, int token, int row, int col, int row_span,
                                int col_span, int bg_index) {
    ImageBuffer image = scene_background(model, bg_index, 64, 64);
    const auto fg = model.fact_anchor_color(token);
    image.fill_rect(col * 16, row * 16, col_span * 16, row_span * 16, fg[0], fg[1], fg[2]);
    return image;
}

double max_inflated_norm(const ToyModel& model, const FeatureSequence& seq) {
    // Inflated rows are identified by their register-direction component.
    double best = 0.0;
    for (std::size_t i = 1; i < seq.tokens.size(); ++i) {
        if (dot(seq.tokens[i], model.register_direction()) > 1.0) {
            best = std::max(best, l2_norm(seq.tokens[i]));
        }
    }
    return best;
}

double max_content_norm(const ToyModel& model, const FeatureSequence& seq) {
    double best = 0.0;
    for (std::size_t i = 1; i < seq.tokens.size(); ++i) {
        if (dot(seq.tokens[i], model.register_direction()) <= 1.0) {
            best = std::max(best, l2_norm(seq.tokens[i]));
        }
    }
    return best;
}

}  // namespace

TEST_CASE("encode is deterministic") {
    const ToyModel model{ToyModelConfig{}};
    const ImageBuffer image = single_object_scene(model, 4, 1, 1, 2, 2, 0);
    CHECK(model.encode(image) == model.encode(image));
}

TEST_CASE("solid image: equal cells before inflation, larger norms after") {
    ToyModelConfig cfg;
    const ToyModel model(cfg);
    const ImageBuffer image(64, 64, 127, 127, 127);
    const FeatureSequence seq = model.encode(image);
    REQUIRE(seq.token_count() == 17);

    // With zero register gain every cell feature is identical.
    ToyModelConfig flat_cfg = cfg;
    flat_cfg.register_gain = 1e-12;  // validate() requires > 0
    flat_cfg.register_bias_gain = 0.0;
    const ToyModel flat(flat_cfg);
    const FeatureSequence base = flat.encode(image);
    for (std::size_t i = 2; i < base.tokens.size(); ++i) {
        for (int k = 0; k < cfg.feature_dim; ++k) {
            CHECK(base.tokens[i][k] == doctest::Approx(base.tokens[1][k]).epsilon(1e-9));
        }
    }

    // Designated cells end up strictly larger in norm than the rest.
    int inflated = 0;
    for (std::size_t i = 1; i < seq.tokens.size(); ++i) {
        if (dot(seq.tokens[i], model.register_direction()) > 1.0) {
            ++inflated;
            CHECK(l2_norm(seq.tokens[i]) > l2_norm(base.tokens[i]) + 1.0);
        }
    }
    CHECK(inflated == cfg.register_count);
}

TEST_CASE("inflation matches the closed-form accumulation") {
    // Spec'd constants: 4 encoder layers at g = 2, so +8u total.
    ToyModelConfig cfg;
    cfg.encoder_layers = 4;
    cfg.register_gain = 2.0;
    cfg.register_bias_gain = 0.0;
    const ToyModel model(cfg);

    ToyModelConfig base_cfg = cfg;
    base_cfg.register_gain = 1e-12;
    const ToyModel flat(base_cfg);

    const ImageBuffer image = single_object_scene(model, 2, 1, 2, 1, 1, 1);
    const FeatureSequence seq = model.encode(image);
    const FeatureSequence base = flat.encode(image);
    bool found = false;
    for (std::size_t i = 1; i < seq.tokens.size(); ++i) {
        FeatureVector expectation = base.tokens[i];
        const double delta = dot(seq.tokens[i], model.register_direction()) -
                             dot(base.tokens[i], model.register_direction());
        if (delta > 1.0) {
            found = true;
            for (int k = 0; k < cfg.feature_dim; ++k) {
                expectation[k] += 4.0 * 2.0 * model.register_direction()[k];
                CHECK(seq.tokens[i][k] == doctest::Approx(expectation[k]).epsilon(1e-9));
            }
            // Norm ratio equals ||base + 8u|| / ||base|| by direct arithmetic.
            CHECK(l2_norm(seq.tokens[i]) / l2_norm(base.tokens[i]) ==
                  doctest::Approx(l2_norm(expectation) / l2_norm(base.tokens[i])).epsilon(1e-9));
        }
    }
    CHECK(found);
}

TEST_CASE("norm inflation ratio is at least five with defaults") {
    const ToyModel model{ToyModelConfig{}};
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 12; ++trial) {
        const int token = static_cast<int>(rng() % vocab::kFactCount);
        const ImageBuffer image =
            single_object_scene(model, token, static_cast<int>(rng() % 3),
                                static_cast<int>(rng() % 3), 1 + static_cast<int>(rng() % 2),
                                1 + static_cast<int>(rng() % 2), static_cast<int>(rng() % 3));
        const FeatureSequence seq = model.encode(image);
        const double ratio = max_inflated_norm(model, seq) / max_content_norm(model, seq);
        CHECK(ratio >= 5.0);
    }
}

TEST_CASE("small images are rejected") {
    const ToyModel model{ToyModelConfig{}};
    CHECK_THROWS_AS(model.encode(ImageBuffer(3, 64, 0, 0, 0)), ShapeError);
    CHECK_THROWS_AS(model.encode(ImageBuffer()), ShapeError);
}

TEST_CASE("attention weights: symmetry, normalization, saturation") {
    // All keys identical: uniform.
    const std::vector<FeatureVector> same(7, FeatureVector{0.3, -0.2, 0.9, 0.1});
    const ProbVector uniform = attention_weights({1.0, 1.0, 0.0, -1.0}, same, 4);
    for (double w : uniform) {
        CHECK(w == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    }

    // One inflated key along u with norm 50, q.u = 1, content scores <= 1, d = 4.
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> uni(-0.5, 0.5);
    std::vector<FeatureVector> keys;
    keys.push_back({50.0, 0.0, 0.0, 0.0});  // u = e0
    for (int j = 0; j < 9; ++j) {
        keys.push_back({uni(rng), uni(rng), uni(rng), uni(rng)});
    }
    const FeatureVector q = {1.0, 0.7, -0.3, 0.2};
    const ProbVector attn = attention_weights(q, keys, 4);
    CHECK(attn[0] > 0.99);
    double sum = 0.0;
    for (double w : attn) {
        sum += w;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(attention_weights(q, {}, 4), ShapeError);
    CHECK_THROWS_AS(attention_weights(q, {{1.0, 2.0}}, 4), ShapeError);
    CHECK_THROWS_AS(attention_weights(q, keys, 0), InvalidParameter);
}

TEST_CASE("decoder step: saturated buffer pins the context to the buffer row") {
    // Saturation construction: one register cell, uncapped scores, strong
    // query alignment with the register direction.
    ToyModelConfig cfg;
    cfg.register_count = 1;
    cfg.register_gain = 16.0;
    cfg.query_gain = 6.0;
    cfg.sink_affinity = 1.0;
    cfg.attn_score_cap = 1e9;
    cfg.inertia_gain = 0.0;
    const ToyModel model(cfg);
    const ImageBuffer image = single_object_scene(model, 3, 2, 2, 1, 1, 1);
    const FeatureSequence seq = model.encode(image);

    // Find the buffer row.
    std::size_t vsb = 0;
    double best = 0.0;
    for (std::size_t i = 1; i < seq.tokens.size(); ++i) {
        if (l2_norm(seq.tokens[i]) > best) {
            best = l2_norm(seq.tokens[i]);
            vsb = i;
        }
    }
    const auto ctx = model.make_context({vocab::kDescribe}, {});
    LayerState state = model.initial_state(ctx);
    state = model.step(state, 1, seq);
    FeatureVector diff = state.context;
    for (int k = 0; k < cfg.feature_dim; ++k) {
        diff[k] -= seq.tokens[vsb][k];
    }
    CHECK(l2_norm(diff) < 1e-6);

    // And b = 0 means the state update is exactly h + c_t.
    for (int k = 0; k < cfg.feature_dim; ++k) {
        CHECK(state.h[k] == doctest::Approx(model.initial_state(ctx).h[k] + state.context[k])
                                .epsilon(1e-12));
    }
}

TEST_CASE("decoder step: determinism and layer bookkeeping") {
    const ToyModel model{ToyModelConfig{}};
    const ImageBuffer image = single_object_scene(model, 5, 1, 1, 1, 2, 0);
    const FeatureSequence seq = model.encode(image);
    const auto ctx = model.make_context({vocab::kDescribe}, {});
    LayerState a = model.initial_state(ctx);
    LayerState b = model.initial_state(ctx);
    for (int l = 1; l <= model.layer_count(); ++l) {
        a = model.step(a, l, seq);
        b = model.step(b, l, seq);
    }
    CHECK(a.h == b.h);
    CHECK(a.context == b.context);

    LayerState fresh = model.initial_state(ctx);
    CHECK_THROWS_AS(model.step(fresh, 0, seq), InvalidLayer);
    CHECK_THROWS_AS(model.step(fresh, 2, seq), InvalidLayer);  // must consume layer l-1
    CHECK_THROWS_AS(model.step(fresh, model.layer_count() + 1, seq), InvalidLayer);
    CHECK_THROWS_AS(model.project(fresh, ctx), InvalidLayer);
}

TEST_CASE("latent buffering under saturation") {
    ToyModelConfig cfg;
    cfg.register_count = 1;
    cfg.register_gain = 16.0;
    cfg.query_gain = 6.0;
    cfg.sink_affinity = 1.0;
    cfg.attn_score_cap = 1e9;
    const ToyModel model(cfg);
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const ImageBuffer image =
            single_object_scene(model, static_cast<int>(rng() % 16), static_cast<int>(rng() % 4),
                                static_cast<int>(rng() % 4), 1, 1, static_cast<int>(rng() % 3));
        const FeatureSequence seq = model.encode(image);
        std::size_t vsb = 0;
        double best = 0.0;
        for (std::size_t i = 1; i < seq.tokens.size(); ++i) {
            if (l2_norm(seq.tokens[i]) > best) {
                best = l2_norm(seq.tokens[i]);
                vsb = i;
            }
        }
        const auto ctx = model.make_context({vocab::kDescribe}, {});
        const LayerState s = model.step(model.initial_state(ctx), 1, seq);
        FeatureVector diff = s.context;
        for (int k = 0; k < cfg.feature_dim; ++k) {
            diff[k] -= seq.tokens[vsb][k];
        }
        CHECK(l2_norm(diff) <= 0.01 * l2_norm(seq.tokens[vsb]));
    }
}

TEST_CASE("project logits follow the linear readout oracle") {
    const ToyModel model{ToyModelConfig{}};
    const auto& cfg = model.config();
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> uni(-2.0, 2.0);
    const auto ctx = model.make_context({vocab::kDescribe}, {});
    for (int trial = 0; trial < 50; ++trial) {
        FeatureVector h(cfg.feature_dim);
        for (double& x : h) {
            x = uni(rng);
        }
        const LogitVector logits = model.lens_logits(h, ctx);
        for (int t = 0; t < cfg.vocab_size; ++t) {
            if (t == vocab::kAsk || t == vocab::kDescribe || t == vocab::kYes || t == vocab::kNo) {
                continue;  // constants in caption mode
            }
            CHECK(logits[t] ==
                  doctest::Approx(cfg.readout_gain * dot(h, model.token_readout(t)))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("pure bias state favors priors; pure concept state favors its fact token") {
    const ToyModel model{ToyModelConfig{}};
    const auto ctx = model.make_context({vocab::kDescribe}, {});
    FeatureVector h_bias = model.bias_direction();
    for (double& x : h_bias) {
        x *= 4.0;
    }
    const LogitVector bias_logits = model.lens_logits(h_bias, ctx);
    const int bias_argmax =
        static_cast<int>(std::max_element(bias_logits.begin(), bias_logits.end()) -
                         bias_logits.begin());
    CHECK(vocab::is_prior(bias_argmax));

    FeatureVector h_fact = model.token_readout(9);
    for (double& x : h_fact) {
        x *= 4.0;
    }
    const LogitVector fact_logits = model.lens_logits(h_fact, ctx);
    const int fact_argmax =
        static_cast<int>(std::max_element(fact_logits.begin(), fact_logits.end()) -
                         fact_logits.begin());
    CHECK(fact_argmax == 9);
}

TEST_CASE("toy config save/load round trip and validation") {
    ToyModelConfig cfg;
    cfg.seed = 777;
    cfg.inertia_gain = 0.41;
    cfg.lib_bias_gain = 6.5;
    const std::string path =
        (std::filesystem::temp_directory_path() / "ace_toy_cfg.txt").string();
    save_toy_config(cfg, path);
    const ToyModelConfig loaded = load_toy_config(path);
    CHECK(loaded.seed == 777);
    CHECK(loaded.inertia_gain == doctest::Approx(0.41));
    CHECK(loaded.lib_bias_gain == doctest::Approx(6.5));
    CHECK(loaded.layers == cfg.layers);
    std::filesystem::remove(path);

    ToyModelConfig bad;
    bad.vocab_size = 100;
    CHECK_THROWS_AS(bad.validate(), InvalidParameter);
    bad = ToyModelConfig{};
    bad.inertia_gain = -0.1;
    CHECK_THROWS_AS(bad.validate(), InvalidParameter);
}

TEST_CASE("token naming round trip") {
    for (int t = 0; t < vocab::kSize; ++t) {
        CHECK(vocab::token_from_name(vocab::token_name(t)) == t);
    }
    CHECK(vocab::token_from_name("17") == 17);
    CHECK_THROWS_AS(vocab::token_from_name("nonsense"), InvalidToken);
    CHECK_THROWS_AS(vocab::token_from_name("500"), InvalidToken);
}

TEST_CASE("plant_scenario verifies the false equilibrium") {
    ToyModelConfig cfg;
    PlantSpec spec;
    spec.fact_token = 7;
    spec.subject_row = 1;
    spec.subject_col = 2;
    spec.inertia_gain = 0.0;
    // Without inertia the fact token wins, so nothing can be planted.
    CHECK_THROWS_AS(plant_scenario(cfg, spec), CannotPlant);

    spec.inertia_gain = 0.5;
    const PlantedScenario planted = plant_scenario(cfg, spec);
    CHECK(planted.fact_token == 7);
    CHECK(vocab::is_prior(planted.prior_token));
    CHECK(planted.ground_truth == std::vector<int>{7});
    CHECK(planted.image.valid());
    CHECK(planted.subject_mask.count() == 16 * 16);

    // Requesting a prior that does not win is rejected.
    PlantSpec wrong = spec;
    wrong.prior_token = planted.prior_token + 1;
    CHECK_THROWS_AS(plant_scenario(cfg, wrong), CannotPlant);

    PlantSpec invalid = spec;
    invalid.fact_token = vocab::kPriorBegin;
    CHECK_THROWS_AS(plant_scenario(cfg, invalid), InvalidParameter);
    invalid = spec;
    invalid.subject_col = 5;
    CHECK_THROWS_AS(plant_scenario(cfg, invalid), InvalidParameter);
}
