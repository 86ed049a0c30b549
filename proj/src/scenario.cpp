#include "ace/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace ace {

namespace {

std::uint64_t draw(std::mt19937_64& rng, std::uint64_t n) { return n == 0 ? 0 : rng() % n; }

double unit_draw(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::array<std::uint8_t, 3> pick_lib_color(const ToyModel& model, std::mt19937_64& rng) {
    const auto& palette = model.library_palette();
    return palette[draw(rng, palette.size())];
}

// Blob with stripes; organic-ish silhouette.
RgbaPatch natural_patch(const ToyModel& model, std::mt19937_64& rng, int size) {
    RgbaPatch p(size, size);
    const auto a = pick_lib_color(model, rng);
    const auto b = pick_lib_color(model, rng);
    const double cx = size / 2.0;
    const double cy = size / 2.0;
    const double rx = size * (0.32 + 0.1 * unit_draw(rng));
    const double ry = size * (0.32 + 0.1 * unit_draw(rng));
    const int stripe = 2 + static_cast<int>(draw(rng, 3));
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) {
            const double dx = (x - cx) / rx;
            const double dy = (y - cy) / ry;
            if (dx * dx + dy * dy > 1.0) {
                continue;
            }
            const auto& c = ((x + y) / stripe) % 2 == 0 ? a : b;
            std::uint8_t* px = p.at(x, y);
            px[0] = c[0];
            px[1] = c[1];
            px[2] = c[2];
            px[3] = 255;
        }
    }
    return p;
}

// Boxy body with a lighter cabin block.
RgbaPatch vehicle_patch(const ToyModel& model, std::mt19937_64& rng, int size) {
    RgbaPatch p(size, size);
    const auto body = pick_lib_color(model, rng);
    const auto cabin = pick_lib_color(model, rng);
    const int top = size / 3;
    const int bottom = size - 1 - static_cast<int>(draw(rng, size / 6 + 1));
    for (int y = top; y <= bottom; ++y) {
        for (int x = 1; x < size - 1; ++x) {
            std::uint8_t* px = p.at(x, y);
            px[0] = body[0];
            px[1] = body[1];
            px[2] = body[2];
            px[3] = 255;
        }
    }
    for (int y = top / 2; y < top; ++y) {
        for (int x = size / 4; x < 3 * size / 4; ++x) {
            std::uint8_t* px = p.at(x, y);
            px[0] = cabin[0];
            px[1] = cabin[1];
            px[2] = cabin[2];
            px[3] = 255;
        }
    }
    return p;
}

// Checkerboard appliance face inside a rounded silhouette.
RgbaPatch domestic_patch(const ToyModel& model, std::mt19937_64& rng, int size) {
    RgbaPatch p(size, size);
    const auto a = pick_lib_color(model, rng);
    const auto b = pick_lib_color(model, rng);
    const int check = 3 + static_cast<int>(draw(rng, 3));
    const int margin = 1 + static_cast<int>(draw(rng, 2));
    for (int y = margin; y < size - margin; ++y) {
        for (int x = margin; x < size - margin; ++x) {
            const bool corner = (x < 2 * margin || x >= size - 2 * margin) &&
                                (y < 2 * margin || y >= size - 2 * margin);
            if (corner) {
                continue;
            }
            const auto& c = ((x / check) + (y / check)) % 2 == 0 ? a : b;
            std::uint8_t* px = p.at(x, y);
            px[0] = c[0];
            px[1] = c[1];
            px[2] = c[2];
            px[3] = 255;
        }
    }
    return p;
}

}  // namespace

ImageBuffer scene_background(const ToyModel& model, int neutral_index, int width, int height) {
    const auto bg = model.neutral_color(neutral_index);
    ImageBuffer image(width, height, bg[0], bg[1], bg[2]);
    const int cols = model.config().grid_cols;
    for (int c = 0; c < cols; ++c) {
        const int shade = (2 * c - (cols - 1)) * 2;  // symmetric ramp, +-6 at 4 columns
        auto adjust = [&](int v) {
            return static_cast<std::uint8_t>(std::clamp(v + shade, 0, 255));
        };
        image.fill_rect(c * width / cols, 0, (c + 1) * width / cols - c * width / cols, height,
                        adjust(bg[0]), adjust(bg[1]), adjust(bg[2]));
    }
    return image;
}

std::vector<LibraryAsset> generate_fixture_assets(const ToyModel& model, int count,
                                                  std::uint64_t seed) {
    if (count < 1) {
        throw InvalidParameter("asset count must be >= 1");
    }
    std::mt19937_64 rng(seed);
    // Library composition: 40% / 35% / 25% across the three domains.
    const int n_natural = count * 40 / 100;
    const int n_vehicle = count * 35 / 100;
    std::vector<LibraryAsset> assets;
    assets.reserve(count);
    for (int i = 0; i < count; ++i) {
        LibraryAsset asset;
        const int size = 20 + static_cast<int>(draw(rng, 9));
        if (i < n_natural) {
            asset.category = ObjectCategory::NaturalOrganism;
            asset.patch = natural_patch(model, rng, size);
        } else if (i < n_natural + n_vehicle) {
            asset.category = ObjectCategory::ManmadeVehicle;
            asset.patch = vehicle_patch(model, rng, size);
        } else {
            asset.category = ObjectCategory::DomesticIndustrial;
            asset.patch = domestic_patch(model, rng, size);
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%s_%04d", to_string(asset.category), i);
        asset.id = buf;
        asset.alignment_score = static_cast<float>(0.30 + 0.65 * unit_draw(rng));
        assets.push_back(std::move(asset));
    }
    return assets;
}

FeatureVector patch_global_feature(const ToyModel& model, const RgbaPatch& patch) {
    const int cell = 16;
    const int width = model.config().grid_cols * cell;
    const int height = model.config().grid_rows * cell;
    ImageBuffer canvas(width, height, 127, 127, 127);
    const int x0 = std::max(0, (width - patch.width) / 2);
    const int y0 = std::max(0, (height - patch.height) / 2);
    for (int y = 0; y < patch.height && y0 + y < height; ++y) {
        for (int x = 0; x < patch.width && x0 + x < width; ++x) {
            const std::uint8_t* src = patch.at(x, y);
            if (src[3] < 128) {
                continue;
            }
            std::uint8_t* dst = canvas.at(x0 + x, y0 + y);
            dst[0] = src[0];
            dst[1] = src[1];
            dst[2] = src[2];
        }
    }
    return model.encode(canvas).global();
}

AdversarialLibrary build_fixture_library(const ToyModel& model, int count, std::uint64_t seed) {
    const std::vector<LibraryAsset> assets = generate_fixture_assets(model, count, seed);
    return build_library(
        assets, [&model](const RgbaPatch& p) { return patch_global_feature(model, p); },
        "toy_encoder_global");
}

namespace {

struct CellRect {
    int row = 0;
    int col = 0;
    int row_span = 1;
    int col_span = 1;
};

bool overlaps(const CellRect& a, const CellRect& b) {
    return a.row < b.row + b.row_span && b.row < a.row + a.row_span && a.col < b.col + b.col_span &&
           b.col < a.col + a.col_span;
}

}  // namespace

Suite generate_suite(const ToyModel& model, int scenario_count, std::uint64_t seed) {
    if (scenario_count < 2) {
        throw InvalidParameter("suite needs at least 2 scenarios for co-occurrence sampling");
    }
    std::mt19937_64 rng(seed);
    const ToyModelConfig& cfg = model.config();
    const int cell = 16;
    const int width = cfg.grid_cols * cell;
    const int height = cfg.grid_rows * cell;
    static const char* kCategories[] = {"existence", "count", "position", "color"};

    Suite suite;
    suite.scenarios.resize(scenario_count);
    // Pass 1: scenes and ground truth.
    for (int i = 0; i < scenario_count; ++i) {
        Scenario& sc = suite.scenarios[i];
        char buf[16];
        std::snprintf(buf, sizeof(buf), "scn%03d", i);
        sc.id = buf;
        sc.category = kCategories[i % 4];
        sc.image = scene_background(model, static_cast<int>(draw(rng, 3)), width, height);
        sc.subject_mask = BinaryMask(width, height, 0);

        const double r = unit_draw(rng);
        const int object_count = r < 0.30 ? 1 : (r < 0.60 ? 2 : (r < 0.85 ? 3 : 4));
        // Popular anchors appear more often so the popularity table has shape.
        std::vector<int> pool;
        for (int t = 0; t < vocab::kFactCount; ++t) {
            const int weight = t < 5 ? 3 : 1;
            for (int w = 0; w < weight; ++w) {
                pool.push_back(t);
            }
        }
        std::vector<CellRect> placed;
        for (int k = 0; k < object_count && !pool.empty(); ++k) {
            // The first object comes from the popular anchors so every scene
            // shares vocabulary with the rest of the suite (keeps adversarial
            // probes satisfiable on small suites).
            const int token = k == 0 ? static_cast<int>(draw(rng, 5))
                                     : pool[draw(rng, pool.size())];
            if (std::find(sc.ground_truth.begin(), sc.ground_truth.end(), token) !=
                sc.ground_truth.end()) {
                continue;
            }
            // Mixed strengths: single-cell objects are weak evidence.
            const double s = unit_draw(rng);
            CellRect rect;
            rect.row_span = s < 0.45 ? 1 : (s < 0.8 ? 1 : 2);
            rect.col_span = s < 0.45 ? 1 : (s < 0.8 ? 2 : 2);
            bool ok = false;
            for (int attempt = 0; attempt < 40 && !ok; ++attempt) {
                rect.row = static_cast<int>(draw(rng, cfg.grid_rows - rect.row_span + 1));
                rect.col = static_cast<int>(draw(rng, cfg.grid_cols - rect.col_span + 1));
                ok = true;
                for (const CellRect& other : placed) {
                    if (overlaps(rect, other)) {
                        ok = false;
                        break;
                    }
                }
            }
            if (!ok) {
                continue;
            }
            placed.push_back(rect);
            sc.ground_truth.push_back(token);
            const auto fg = model.fact_anchor_color(token);
            sc.image.fill_rect(rect.col * cell, rect.row * cell, rect.col_span * cell,
                               rect.row_span * cell, fg[0], fg[1], fg[2]);
            for (int y = rect.row * cell; y < (rect.row + rect.row_span) * cell; ++y) {
                for (int x = rect.col * cell; x < (rect.col + rect.col_span) * cell; ++x) {
                    sc.subject_mask->set(x, y, true);
                }
            }
        }
        std::sort(sc.ground_truth.begin(), sc.ground_truth.end());
    }

    // Pass 2: popularity and co-occurrence over the suite itself.
    std::vector<int> frequency(vocab::kFactCount, 0);
    std::vector<std::vector<int>> cooc(vocab::kFactCount, std::vector<int>(vocab::kFactCount, 0));
    for (const Scenario& sc : suite.scenarios) {
        for (int a : sc.ground_truth) {
            ++frequency[a];
            for (int b : sc.ground_truth) {
                if (a != b) {
                    ++cooc[a][b];
                }
            }
        }
    }

    static const char* kSplits[] = {"random", "popular", "adversarial"};
    for (Scenario& sc : suite.scenarios) {
        std::vector<int> absent;
        for (int t = 0; t < vocab::kFactCount; ++t) {
            if (std::find(sc.ground_truth.begin(), sc.ground_truth.end(), t) ==
                sc.ground_truth.end()) {
                absent.push_back(t);
            }
        }
        // Three positive probes (objects recycled when the scene is sparse).
        for (int s = 0; s < 3; ++s) {
            Probe p;
            p.object = sc.ground_truth[s % sc.ground_truth.size()];
            p.split = kSplits[s];
            p.expected_yes = true;
            sc.probes.push_back(p);
        }
        // Random negative.
        {
            Probe p;
            p.object = absent[draw(rng, absent.size())];
            p.split = "random";
            p.expected_yes = false;
            sc.probes.push_back(p);
        }
        // Popular negative: the most frequent absent object.
        {
            Probe p;
            p.object = *std::max_element(absent.begin(), absent.end(),
                                         [&](int a, int b) { return frequency[a] < frequency[b]; });
            p.split = "popular";
            p.expected_yes = false;
            sc.probes.push_back(p);
        }
        // Adversarial negative: absent object with the highest co-occurrence
        // against this scene's ground truth.
        {
            int best = -1;
            int best_score = -1;
            for (int t : absent) {
                int score = 0;
                for (int g : sc.ground_truth) {
                    score += cooc[t][g];
                }
                if (score > best_score) {
                    best_score = score;
                    best = t;
                }
            }
            if (best < 0 || best_score <= 0) {
                throw Error("suite generation: no co-occurring absent object; widen the suite");
            }
            Probe p;
            p.object = best;
            p.split = "adversarial";
            p.expected_yes = false;
            sc.probes.push_back(p);
        }
    }
    verify_suite(suite);
    return suite;
}

void verify_suite(const Suite& suite) {
    std::vector<std::vector<int>> cooc(vocab::kFactCount, std::vector<int>(vocab::kFactCount, 0));
    for (const Scenario& sc : suite.scenarios) {
        for (int a : sc.ground_truth) {
            for (int b : sc.ground_truth) {
                if (a != b) {
                    ++cooc[a][b];
                }
            }
        }
    }
    for (const Scenario& sc : suite.scenarios) {
        if (!sc.image.valid()) {
            throw Error("scenario " + sc.id + ": invalid image");
        }
        if (sc.probes.empty()) {
            throw Error("scenario " + sc.id + ": no probes");
        }
        for (const Probe& p : sc.probes) {
            const bool present = std::find(sc.ground_truth.begin(), sc.ground_truth.end(),
                                           p.object) != sc.ground_truth.end();
            if (p.expected_yes != present) {
                throw Error("scenario " + sc.id + ": probe expectation contradicts ground truth");
            }
            if (p.split != "random" && p.split != "popular" && p.split != "adversarial") {
                throw Error("scenario " + sc.id + ": unknown split '" + p.split + "'");
            }
            if (p.split == "adversarial" && !p.expected_yes) {
                int score = 0;
                for (int g : sc.ground_truth) {
                    score += cooc[p.object][g];
                }
                if (score <= 0) {
                    throw Error("scenario " + sc.id +
                                ": adversarial probe object never co-occurs with the scene");
                }
            }
        }
    }
}

void save_suite(const Suite& suite, const std::string& dir) {
    fs::create_directories(fs::path(dir) / "images");
    fs::create_directories(fs::path(dir) / "masks");
    json doc;
    doc["scenarios"] = json::array();
    for (const Scenario& sc : suite.scenarios) {
        const std::string image_rel = "images/" + sc.id + ".ppm";
        write_ppm(sc.image, (fs::path(dir) / image_rel).string());
        json entry;
        entry["id"] = sc.id;
        entry["image_path"] = image_rel;
        if (sc.subject_mask.has_value()) {
            const std::string mask_rel = "masks/" + sc.id + ".pbm";
            write_pbm(*sc.subject_mask, (fs::path(dir) / mask_rel).string());
            entry["subject_mask_path"] = mask_rel;
        } else {
            entry["subject_mask_path"] = nullptr;
        }
        entry["ground_truth"] = sc.ground_truth;
        entry["category"] = sc.category;
        entry["probes"] = json::array();
        for (const Probe& p : sc.probes) {
            entry["probes"].push_back({{"object", p.object},
                                       {"split", p.split},
                                       {"expected", p.expected_yes ? "yes" : "no"}});
        }
        doc["scenarios"].push_back(std::move(entry));
    }
    std::ofstream out(fs::path(dir) / "suite.json", std::ios::trunc);
    if (!out) {
        throw IoError("cannot write suite.json under " + dir);
    }
    out << doc.dump(2) << "\n";
}

Suite load_suite(const std::string& dir) {
    std::ifstream in(fs::path(dir) / "suite.json");
    if (!in) {
        throw IoError("cannot open suite.json under " + dir);
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw IoError("suite.json parse error: " + std::string(e.what()));
    }
    Suite suite;
    for (const json& entry : doc.at("scenarios")) {
        Scenario sc;
        sc.id = entry.at("id").get<std::string>();
        sc.image = read_ppm((fs::path(dir) / entry.at("image_path").get<std::string>()).string());
        if (entry.contains("subject_mask_path") && !entry.at("subject_mask_path").is_null()) {
            sc.subject_mask =
                read_pbm((fs::path(dir) / entry.at("subject_mask_path").get<std::string>()).string());
        }
        sc.ground_truth = entry.at("ground_truth").get<std::vector<int>>();
        sc.category = entry.at("category").get<std::string>();
        for (const json& pj : entry.at("probes")) {
            Probe p;
            p.object = pj.at("object").get<int>();
            p.split = pj.at("split").get<std::string>();
            p.expected_yes = pj.at("expected").get<std::string>() == "yes";
            sc.probes.push_back(p);
        }
        suite.scenarios.push_back(std::move(sc));
    }
    verify_suite(suite);
    return suite;
}

}  // namespace ace
