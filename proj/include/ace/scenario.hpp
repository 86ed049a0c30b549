#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ace/image.hpp"
#include "ace/library.hpp"
#include "ace/toy_model.hpp"

namespace ace {

struct Probe {
    int object = 0;
    std::string split;  // random | popular | adversarial
    bool expected_yes = false;
};

struct Scenario {
    std::string id;
    ImageBuffer image;
    std::optional<BinaryMask> subject_mask;
    std::vector<int> ground_truth;  // fact tokens present in the image
    std::vector<Probe> probes;
    std::string category;  // existence | count | position | color
};

struct Suite {
    std::vector<Scenario> scenarios;
};

// Flat-per-cell background with a gentle per-column shade ramp. The ramp
// stays inside one quantization bin but makes register designation depend on
// the global mean, so counter-commonsense patches relocate the sinks in the
// CF encode (buffer instability under perturbation).
ImageBuffer scene_background(const ToyModel& model, int neutral_index, int width, int height);

// Procedurally textured RGBA patch assets painted with the counter-commonsense
// palette, split 40/35/25 across the three categories. Scores land in
// [0.30, 0.95], i.e. everything survives the build filter unless a test
// injects its own rejects.
std::vector<LibraryAsset> generate_fixture_assets(const ToyModel& model, int count,
                                                  std::uint64_t seed);

// Feature extractor used for fixture libraries: the patch composited onto a
// neutral canvas, encoded by the toy model, global feature (row 0). Keeps the
// retrieval query and the cached library vectors in one manifold.
FeatureVector patch_global_feature(const ToyModel& model, const RgbaPatch& patch);

AdversarialLibrary build_fixture_library(const ToyModel& model, int count, std::uint64_t seed);

// Seeded synthetic scene suite: flat neutral backgrounds, cell-aligned
// colored objects of mixed strengths, 6 probes per scenario (3 positive, one
// negative per POPE split). Popularity and co-occurrence tables are computed
// over the generated suite itself.
Suite generate_suite(const ToyModel& model, int scenario_count, std::uint64_t seed);

// suite.json plus images/*.ppm and masks/*.pbm under `dir`.
void save_suite(const Suite& suite, const std::string& dir);
Suite load_suite(const std::string& dir);

// Suite-wide integrity check (throws Error): probe expectations consistent
// with ground truth, adversarial probes reference absent objects that
// co-occur with this scenario's objects elsewhere in the suite.
void verify_suite(const Suite& suite);

}  // namespace ace
