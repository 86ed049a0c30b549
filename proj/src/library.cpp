#include "ace/library.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

namespace ace {

const char* to_string(ObjectCategory c) {
    switch (c) {
        case ObjectCategory::NaturalOrganism:
            return "natural_organism";
        case ObjectCategory::ManmadeVehicle:
            return "manmade_vehicle";
        case ObjectCategory::DomesticIndustrial:
            return "domestic_industrial";
    }
    return "unknown";
}

ObjectCategory category_from_string(const std::string& s) {
    if (s == "natural_organism") {
        return ObjectCategory::NaturalOrganism;
    }
    if (s == "manmade_vehicle") {
        return ObjectCategory::ManmadeVehicle;
    }
    if (s == "domestic_industrial") {
        return ObjectCategory::DomesticIndustrial;
    }
    throw InvalidParameter("unknown object category '" + s + "'");
}

namespace {

constexpr char kMagic[8] = {'A', 'C', 'E', 'L', 'I', 'B', '1', '\n'};

FeatureVector quantize_f32(const FeatureVector& v) {
    FeatureVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = static_cast<double>(static_cast<float>(v[i]));
    }
    return out;
}

void put_u16(std::ostream& out, std::uint16_t v) {
    const std::uint8_t b[2] = {static_cast<std::uint8_t>(v & 0xff),
                               static_cast<std::uint8_t>(v >> 8)};
    out.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& out, std::uint32_t v) {
    std::uint8_t b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<std::uint8_t>((v >> (8 * i)) & 0xff);
    }
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ostream& out, float v) {
    std::uint32_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

std::uint16_t get_u16(std::istream& in) {
    std::uint8_t b[2];
    in.read(reinterpret_cast<char*>(b), 2);
    if (!in) {
        throw CorruptLibrary("truncated file");
    }
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream& in) {
    std::uint8_t b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) {
        throw CorruptLibrary("truncated file");
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    }
    return v;
}

float get_f32(std::istream& in) {
    const std::uint32_t bits = get_u32(in);
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
}

}  // namespace

AdversarialLibrary build_library(const std::vector<LibraryAsset>& assets,
                                 const FeatureExtractor& extractor,
                                 const std::string& extractor_id) {
    if (assets.empty()) {
        throw EmptyLibrary("no assets supplied");
    }
    AdversarialLibrary lib;
    lib.built_with = extractor_id;
    for (const LibraryAsset& asset : assets) {
        if (asset.alignment_score < kAlignmentThreshold) {
            continue;  // quality filter
        }
        if (!asset.patch.valid()) {
            throw ShapeError("asset '" + asset.id + "' has an empty patch");
        }
        FeatureVector feature = extractor(asset.patch);
        if (lib.feature_dim == 0) {
            lib.feature_dim = static_cast<int>(feature.size());
        }
        if (static_cast<int>(feature.size()) != lib.feature_dim || feature.empty()) {
            throw ShapeError("extractor dimension inconsistent for asset '" + asset.id + "'");
        }
        AdversarialObject obj;
        obj.id = asset.id;
        obj.category = asset.category;
        obj.patch = asset.patch;
        obj.feature = quantize_f32(normalized(feature));
        obj.alignment_score = asset.alignment_score;
        lib.objects.push_back(std::move(obj));
    }
    if (lib.objects.empty()) {
        throw EmptyLibrary("all assets pruned by alignment filter");
    }
    return lib;
}

std::size_t select_adversarial_index(const FeatureVector& v_raw,
                                     const AdversarialLibrary& library) {
    if (library.objects.empty()) {
        throw EmptyLibrary("select on empty library");
    }
    if (static_cast<int>(v_raw.size()) != library.feature_dim) {
        throw ShapeError("query dimension does not match library");
    }
    if (l2_norm(v_raw) <= 0.0) {
        throw DegenerateVector("zero-norm query");
    }
    std::size_t best = 0;
    double best_sim = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < library.objects.size(); ++k) {
        const double sim = cosine_similarity(v_raw, library.objects[k].feature);
        if (sim < best_sim) {  // strict '<' keeps the lowest index on ties
            best_sim = sim;
            best = k;
        }
    }
    return best;
}

const AdversarialObject& select_adversarial(const FeatureVector& v_raw,
                                            const AdversarialLibrary& library) {
    return library.objects[select_adversarial_index(v_raw, library)];
}

std::size_t library_file_size(const AdversarialLibrary& library) {
    std::size_t n = 8 + 4 + 4;  // magic + K + D
    for (const AdversarialObject& obj : library.objects) {
        n += 2 + obj.id.size();                // id
        n += 1 + 2 + 2;                        // category + w + h
        n += obj.patch.pixels.size();          // RGBA
        n += 4 * library.feature_dim;          // feature
        n += 4;                                // alignment score
    }
    return n;
}

void save_library(const AdversarialLibrary& library, const std::string& path) {
    if (library.objects.empty()) {
        throw EmptyLibrary("refusing to save empty library");
    }
    for (const AdversarialObject& obj : library.objects) {
        if (static_cast<int>(obj.feature.size()) != library.feature_dim) {
            throw ShapeError("object '" + obj.id + "' feature dim mismatch");
        }
        if (!obj.patch.valid() || obj.patch.width > 0xffff || obj.patch.height > 0xffff ||
            obj.id.size() > 0xffff) {
            throw ShapeError("object '" + obj.id + "' does not fit the format");
        }
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path);
    }
    out.write(kMagic, sizeof(kMagic));
    put_u32(out, static_cast<std::uint32_t>(library.objects.size()));
    put_u32(out, static_cast<std::uint32_t>(library.feature_dim));
    for (const AdversarialObject& obj : library.objects) {
        put_u16(out, static_cast<std::uint16_t>(obj.id.size()));
        out.write(obj.id.data(), static_cast<std::streamsize>(obj.id.size()));
        out.put(static_cast<char>(obj.category));
        put_u16(out, static_cast<std::uint16_t>(obj.patch.width));
        put_u16(out, static_cast<std::uint16_t>(obj.patch.height));
        out.write(reinterpret_cast<const char*>(obj.patch.pixels.data()),
                  static_cast<std::streamsize>(obj.patch.pixels.size()));
        for (double v : obj.feature) {
            put_f32(out, static_cast<float>(v));
        }
        put_f32(out, obj.alignment_score);
    }
    if (!out) {
        throw IoError("write failed: " + path);
    }
}

AdversarialLibrary load_library(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path);
    }
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw CorruptLibrary("bad magic in " + path);
    }
    const std::uint32_t count = get_u32(in);
    const std::uint32_t dim = get_u32(in);
    if (count == 0) {
        throw EmptyLibrary(path + " holds no objects");
    }
    if (dim == 0) {
        throw ShapeError(path + " declares feature dimension 0");
    }
    AdversarialLibrary lib;
    lib.feature_dim = static_cast<int>(dim);
    lib.objects.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        AdversarialObject obj;
        const std::uint16_t id_len = get_u16(in);
        obj.id.resize(id_len);
        in.read(obj.id.data(), id_len);
        const int cat = in.get();
        if (!in || cat < 0 || cat > 2) {
            throw CorruptLibrary("bad object record in " + path);
        }
        obj.category = static_cast<ObjectCategory>(cat);
        const std::uint16_t w = get_u16(in);
        const std::uint16_t h = get_u16(in);
        if (w == 0 || h == 0) {
            throw CorruptLibrary("empty patch in " + path);
        }
        obj.patch = RgbaPatch(w, h);
        in.read(reinterpret_cast<char*>(obj.patch.pixels.data()),
                static_cast<std::streamsize>(obj.patch.pixels.size()));
        if (!in) {
            throw CorruptLibrary("truncated patch in " + path);
        }
        obj.feature.resize(dim);
        for (std::uint32_t i = 0; i < dim; ++i) {
            obj.feature[i] = static_cast<double>(get_f32(in));
        }
        obj.alignment_score = get_f32(in);
        lib.objects.push_back(std::move(obj));
    }
    // Trailing bytes mean the header lied about the object count.
    if (in.peek() != EOF) {
        throw CorruptLibrary("trailing bytes in " + path);
    }
    return lib;
}

}  // namespace ace
