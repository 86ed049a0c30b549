#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ace/image.hpp"
#include "ace/numerics.hpp"

namespace ace {

enum class ObjectCategory : std::uint8_t {
    NaturalOrganism = 0,
    ManmadeVehicle = 1,
    DomesticIndustrial = 2,
};

const char* to_string(ObjectCategory c);
ObjectCategory category_from_string(const std::string& s);

// Minimum image-text alignment score an asset must carry to enter the library.
inline constexpr float kAlignmentThreshold = 0.25f;

struct AdversarialObject {
    std::string id;
    ObjectCategory category = ObjectCategory::NaturalOrganism;
    RgbaPatch patch;
    FeatureVector feature;  // unit L2 norm, quantized to f32 for format stability
    float alignment_score = 0.0f;
};

struct AdversarialLibrary {
    std::vector<AdversarialObject> objects;  // insertion order is load order; ties break on it
    int feature_dim = 0;
    std::string built_with;  // extractor identifier; not persisted by the file format

    std::size_t size() const { return objects.size(); }
};

struct LibraryAsset {
    std::string id;
    ObjectCategory category = ObjectCategory::NaturalOrganism;
    RgbaPatch patch;
    float alignment_score = 0.0f;
};

using FeatureExtractor = std::function<FeatureVector(const RgbaPatch&)>;

// Prunes assets below kAlignmentThreshold, extracts and unit-normalizes
// features (quantized to f32 so save/load round-trips exactly), preserves
// insertion order. Throws EmptyLibrary if nothing survives, ShapeError on an
// inconsistent extractor dimension.
AdversarialLibrary build_library(const std::vector<LibraryAsset>& assets,
                                 const FeatureExtractor& extractor,
                                 const std::string& extractor_id = "");

// Farthest-neighbor selection: argmin of CosSim(v_raw, v_k) over the library,
// ties broken by lowest index. Returns the object index.
std::size_t select_adversarial_index(const FeatureVector& v_raw, const AdversarialLibrary& library);
const AdversarialObject& select_adversarial(const FeatureVector& v_raw,
                                            const AdversarialLibrary& library);

// Bit-exact container format:
//   magic "ACELIB1\n", u32 K, u32 D (little-endian), then per object:
//   u16 id-length + UTF-8 id, u8 category, u16 w, u16 h, w*h*4 RGBA bytes,
//   D little-endian f32 feature values, f32 alignment_score.
void save_library(const AdversarialLibrary& library, const std::string& path);
AdversarialLibrary load_library(const std::string& path);

// Exact byte count save_library will emit; used to validate the format arithmetic.
std::size_t library_file_size(const AdversarialLibrary& library);

}  // namespace ace
