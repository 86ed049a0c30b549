#include <string>

#include "ace/decoder.hpp"
#include "ace/scenario.hpp"
#include "ace/toy_model.hpp"

namespace ace {

PlantedScenario plant_scenario(const ToyModelConfig& cfg, const PlantSpec& spec) {
    if (!vocab::is_fact(spec.fact_token)) {
        throw InvalidParameter("plant spec must name a fact token");
    }
    if (spec.prior_token != -1 && !vocab::is_prior(spec.prior_token)) {
        throw InvalidParameter("plant spec prior must be a prior token or -1");
    }
    if (spec.subject_row < 0 || spec.subject_col < 0 || spec.subject_row_span < 1 ||
        spec.subject_col_span < 1 ||
        spec.subject_row + spec.subject_row_span > cfg.grid_rows ||
        spec.subject_col + spec.subject_col_span > cfg.grid_cols) {
        throw InvalidParameter("plant spec subject placement outside the grid");
    }
    if (spec.inertia_gain < 0.0) {
        throw InvalidParameter("plant spec inertia gain must be >= 0");
    }

    ToyModelConfig planted_cfg = cfg;
    planted_cfg.inertia_gain = spec.inertia_gain;
    const ToyModel model(planted_cfg);

    // Cell-aligned subject rectangle on a flat neutral background keeps the
    // concept binding clean and the background inflatable.
    const int cell = 16;
    const int width = cfg.grid_cols * cell;
    const int height = cfg.grid_rows * cell;
    const auto fg = model.fact_anchor_color(spec.fact_token);

    PlantedScenario out;
    out.image = scene_background(model, spec.background_color, width, height);
    out.subject_mask = BinaryMask(width, height, 0);
    const int x0 = spec.subject_col * cell;
    const int y0 = spec.subject_row * cell;
    const int w = spec.subject_col_span * cell;
    const int h = spec.subject_row_span * cell;
    out.image.fill_rect(x0, y0, w, h, fg[0], fg[1], fg[2]);
    for (int y = y0; y < y0 + h; ++y) {
        for (int x = x0; x < x0 + w; ++x) {
            out.subject_mask.set(x, y, true);
        }
    }
    out.fact_token = spec.fact_token;
    out.ground_truth = {spec.fact_token};
    out.inertia_gain = spec.inertia_gain;

    // The baseline greedy decode is the planting oracle: the named prior must
    // actually win at this inertia gain.
    AceConfig probe_cfg;
    probe_cfg.max_new_tokens = 8;
    const std::vector<int> tokens =
        baseline_decode(model, out.image, {vocab::kDescribe}, probe_cfg);
    const int first = tokens.empty() ? vocab::kEos : tokens.front();
    if (!vocab::is_prior(first)) {
        throw CannotPlant("baseline emits " + vocab::token_name(first) +
                          " at b=" + std::to_string(spec.inertia_gain) +
                          "; no false equilibrium to plant");
    }
    if (spec.prior_token != -1 && first != spec.prior_token) {
        throw CannotPlant("baseline emits " + vocab::token_name(first) + ", not the requested " +
                          vocab::token_name(spec.prior_token));
    }
    out.prior_token = first;
    return out;
}

}  // namespace ace
