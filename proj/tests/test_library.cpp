#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <doctest.h>

#include "ace/library.hpp"

using namespace ace;
namespace fs = std::filesystem;

namespace {

RgbaPatch tiny_patch(std::uint8_t r, std::uint8_t g, std::uint8_t b, std::uint8_t a = 255) {
    RgbaPatch p(2, 2);
    for (int i = 0; i < 4; ++i) {
        p.pixels[4 * i] = r;
        p.pixels[4 * i + 1] = g;
        p.pixels[4 * i + 2] = b;
        p.pixels[4 * i + 3] = a;
    }
    return p;
}

FeatureVector random_vector(std::mt19937_64& rng, int dim) {
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    FeatureVector v(dim);
    for (double& x : v) {
        x = uni(rng);
    }
    return v;
}

// The extractor hands out pre-drawn features so tests can steer them.
AdversarialLibrary make_random_library(std::mt19937_64& rng, int count, int dim) {
    std::vector<LibraryAsset> assets;
    std::vector<FeatureVector> features;
    for (int i = 0; i < count; ++i) {
        LibraryAsset asset;
        asset.id = "obj_" + std::to_string(i);
        asset.category = static_cast<ObjectCategory>(i % 3);
        asset.patch = tiny_patch(static_cast<std::uint8_t>(i % 256),
                                 static_cast<std::uint8_t>((i / 256) % 256), 7);
        asset.alignment_score = 0.5f;
        assets.push_back(asset);
        features.push_back(random_vector(rng, dim));
    }
    int next = 0;
    return build_library(
        assets, [&features, &next](const RgbaPatch&) { return features[next++]; }, "test");
}

// Independent retrieval oracle: plain linear scan with explicit cosine.
std::size_t brute_force_argmin(const FeatureVector& query,
                               const std::vector<AdversarialObject>& objects) {
    std::size_t best = 0;
    double best_value = 2.0;
    for (std::size_t k = 0; k < objects.size(); ++k) {
        double dot_qk = 0.0;
        double nq = 0.0;
        double nk = 0.0;
        for (std::size_t i = 0; i < query.size(); ++i) {
            dot_qk += query[i] * objects[k].feature[i];
            nq += query[i] * query[i];
            nk += objects[k].feature[i] * objects[k].feature[i];
        }
        const double sim = dot_qk / std::sqrt(nq * nk);
        if (sim < best_value) {
            best_value = sim;
            best = k;
        }
    }
    return best;
}

std::string temp_path(const char* name) {
    return (fs::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("build_library filters, normalizes and preserves order") {
    std::vector<LibraryAsset> assets;
    for (int i = 0; i < 4; ++i) {
        LibraryAsset a;
        a.id = "a" + std::to_string(i);
        a.category = ObjectCategory::ManmadeVehicle;
        a.patch = tiny_patch(10, 20, 30);
        a.alignment_score = i == 2 ? 0.10f : 0.30f + 0.1f * static_cast<float>(i);
        assets.push_back(a);
    }
    const auto lib = build_library(
        assets, [](const RgbaPatch&) { return FeatureVector{3.0, 4.0, 0.0}; }, "unit");
    CHECK(lib.size() == 3);  // a2 pruned at 0.10 < 0.25
    CHECK(lib.objects[0].id == "a0");
    CHECK(lib.objects[1].id == "a1");
    CHECK(lib.objects[2].id == "a3");
    CHECK(lib.feature_dim == 3);
    CHECK(lib.objects[0].feature[0] == doctest::Approx(0.6).epsilon(1e-6));
    CHECK(lib.objects[0].feature[1] == doctest::Approx(0.8).epsilon(1e-6));
    CHECK(l2_norm(lib.objects[0].feature) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("build_library error paths") {
    CHECK_THROWS_AS(build_library({}, [](const RgbaPatch&) { return FeatureVector{1.0}; }),
                    EmptyLibrary);

    LibraryAsset only;
    only.id = "only";
    only.patch = tiny_patch(1, 2, 3);
    only.alignment_score = 0.10f;
    CHECK_THROWS_AS(build_library({only}, [](const RgbaPatch&) { return FeatureVector{1.0}; }),
                    EmptyLibrary);

    LibraryAsset a = only;
    a.alignment_score = 0.9f;
    LibraryAsset b = a;
    b.id = "b";
    int call = 0;
    CHECK_THROWS_AS(build_library({a, b},
                                  [&call](const RgbaPatch&) {
                                      return call++ == 0 ? FeatureVector{1.0, 0.0}
                                                         : FeatureVector{1.0, 0.0, 0.0};
                                  }),
                    ShapeError);
}

TEST_CASE("select_adversarial basics") {
    std::mt19937_64 rng(3);
    auto lib = make_random_library(rng, 3, 2);
    lib.objects[0].feature = {1.0, 0.0};
    lib.objects[1].feature = {-1.0, 0.0};
    lib.objects[2].feature = {0.0, 1.0};
    CHECK(select_adversarial_index({1.0, 0.0}, lib) == 1);  // antipode

    AdversarialLibrary single;
    single.feature_dim = 2;
    single.objects.push_back(lib.objects[2]);
    CHECK(select_adversarial_index({1.0, 0.0}, single) == 0);

    CHECK_THROWS_AS(select_adversarial_index({0.0, 0.0}, lib), DegenerateVector);
    CHECK_THROWS_AS(select_adversarial_index({1.0, 0.0, 0.0}, lib), ShapeError);
    AdversarialLibrary empty;
    empty.feature_dim = 2;
    CHECK_THROWS_AS(select_adversarial_index({1.0, 0.0}, empty), EmptyLibrary);
}

TEST_CASE("select_adversarial ties break to the lowest index") {
    std::mt19937_64 rng(5);
    auto lib = make_random_library(rng, 3, 2);
    lib.objects[0].feature = {0.0, 1.0};
    lib.objects[1].feature = {-1.0, 0.0};
    lib.objects[2].feature = {-1.0, 0.0};
    CHECK(select_adversarial_index({1.0, 0.0}, lib) == 1);
}

TEST_CASE("select_adversarial equals the brute-force oracle") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const auto lib = make_random_library(rng, 200, 16);
        for (int q = 0; q < 10; ++q) {
            const FeatureVector query = random_vector(rng, 16);
            CHECK(select_adversarial_index(query, lib) == brute_force_argmin(query, lib.objects));
        }
    }
}

TEST_CASE("selection is invariant to positive scaling of the query") {
    std::mt19937_64 rng(11);
    const auto lib = make_random_library(rng, 64, 8);
    for (int q = 0; q < 20; ++q) {
        FeatureVector query = random_vector(rng, 8);
        const std::size_t picked = select_adversarial_index(query, lib);
        for (double& x : query) {
            x *= 731.5;
        }
        CHECK(select_adversarial_index(query, lib) == picked);
        const double best = cosine_similarity(query, lib.objects[picked].feature);
        for (const auto& obj : lib.objects) {
            CHECK(best <= cosine_similarity(query, obj.feature) + 1e-12);
        }
    }
}

TEST_CASE("library save/load round-trip") {
    std::mt19937_64 rng(13);
    const auto lib = make_random_library(rng, 23, 12);
    const std::string path = temp_path("ace_test_lib.bin");
    save_library(lib, path);

    const auto loaded = load_library(path);
    REQUIRE(loaded.size() == lib.size());
    CHECK(loaded.feature_dim == lib.feature_dim);
    for (std::size_t k = 0; k < lib.size(); ++k) {
        CHECK(loaded.objects[k].id == lib.objects[k].id);
        CHECK(loaded.objects[k].category == lib.objects[k].category);
        CHECK(loaded.objects[k].patch == lib.objects[k].patch);
        CHECK(loaded.objects[k].feature == lib.objects[k].feature);  // f32-exact by construction
        CHECK(loaded.objects[k].alignment_score == lib.objects[k].alignment_score);
    }

    // Byte-identical re-serialization.
    const std::string path2 = temp_path("ace_test_lib2.bin");
    save_library(loaded, path2);
    CHECK(slurp(path) == slurp(path2));

    // File size matches the format arithmetic.
    CHECK(fs::file_size(path) == library_file_size(lib));
    fs::remove(path);
    fs::remove(path2);
}

TEST_CASE("library file size formula") {
    std::mt19937_64 rng(17);
    const auto lib = make_random_library(rng, 5, 32);
    std::size_t expected = 8 + 4 + 4;
    for (const auto& obj : lib.objects) {
        expected += 2 + obj.id.size() + 1 + 2 + 2 + obj.patch.pixels.size() + 4 * 32 + 4;
    }
    CHECK(library_file_size(lib) == expected);
}

TEST_CASE("load rejects corrupt files") {
    std::mt19937_64 rng(19);
    const auto lib = make_random_library(rng, 4, 6);
    const std::string path = temp_path("ace_test_corrupt.bin");
    save_library(lib, path);

    {
        std::string bytes = slurp(path);
        bytes[0] = 'X';
        std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes;
        CHECK_THROWS_AS(load_library(path), CorruptLibrary);
    }
    {
        save_library(lib, path);
        std::string bytes = slurp(path);
        bytes.resize(bytes.size() - 7);
        std::ofstream(path, std::ios::binary | std::ios::trunc) << bytes;
        CHECK_THROWS_AS(load_library(path), CorruptLibrary);
    }
    {
        save_library(lib, path);
        std::ofstream(path, std::ios::binary | std::ios::app) << "tail";
        CHECK_THROWS_AS(load_library(path), CorruptLibrary);
    }
    fs::remove(path);
    CHECK_THROWS_AS(load_library(path), IoError);
}
