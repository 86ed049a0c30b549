#include "ace/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ace {

namespace {

constexpr double kMinBackgroundFraction = 0.05;
constexpr double kPatchAreaStart = 0.08;
constexpr double kPatchAreaFloor = 0.02;
constexpr double kPatchAreaStep = 0.01;
constexpr int kDrawsPerLevel = 200;

enum class Morph { Erode, Dilate };

// 3x3 min/max over in-bounds neighbors only (edge replication semantics).
BinaryMask morph3x3(const BinaryMask& m, Morph op) {
    BinaryMask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            std::uint8_t acc = (op == Morph::Erode) ? 1 : 0;
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= m.width || ny >= m.height) {
                        continue;
                    }
                    const std::uint8_t v = m.get(nx, ny);
                    acc = (op == Morph::Erode) ? static_cast<std::uint8_t>(acc & v)
                                               : static_cast<std::uint8_t>(acc | v);
                }
            }
            out.set(x, y, acc);
        }
    }
    return out;
}

BinaryMask open_then_close(const BinaryMask& m) {
    BinaryMask opened = morph3x3(morph3x3(m, Morph::Erode), Morph::Dilate);
    return morph3x3(morph3x3(opened, Morph::Dilate), Morph::Erode);
}

double intensity(const std::uint8_t* px) {
    return (static_cast<double>(px[0]) + px[1] + px[2]) / 3.0;
}

// Per-pixel intensity variance over a clamped 5x5 window.
std::vector<double> local_variance5x5(const ImageBuffer& image) {
    std::vector<double> gray(static_cast<std::size_t>(image.width) * image.height);
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            gray[static_cast<std::size_t>(y) * image.width + x] = intensity(image.at(x, y));
        }
    }
    std::vector<double> var(gray.size());
    for (int y = 0; y < image.height; ++y) {
        for (int x = 0; x < image.width; ++x) {
            double sum = 0.0;
            double sum2 = 0.0;
            int n = 0;
            for (int dy = -2; dy <= 2; ++dy) {
                for (int dx = -2; dx <= 2; ++dx) {
                    const int nx = x + dx;
                    const int ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= image.width || ny >= image.height) {
                        continue;
                    }
                    const double g = gray[static_cast<std::size_t>(ny) * image.width + nx];
                    sum += g;
                    sum2 += g * g;
                    ++n;
                }
            }
            const double mean = sum / n;
            var[static_cast<std::size_t>(y) * image.width + x] =
                std::max(0.0, sum2 / n - mean * mean);
        }
    }
    return var;
}

// Deterministic bounded draw; modulo bias is irrelevant for placement.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    return n == 0 ? 0 : rng() % n;
}

}  // namespace

BinaryMask extract_background_mask(const ImageBuffer& image,
                                   const std::optional<BinaryMask>& subject_mask) {
    if (!image.valid()) {
        throw ShapeError("extract_background_mask: invalid image");
    }
    BinaryMask background(image.width, image.height);
    if (subject_mask.has_value()) {
        if (subject_mask->width != image.width || subject_mask->height != image.height) {
            throw ShapeError("subject mask dimensions do not match image");
        }
        for (std::size_t i = 0; i < background.bits.size(); ++i) {
            background.bits[i] = subject_mask->bits[i] ? 0 : 1;
        }
    } else {
        std::vector<double> var = local_variance5x5(image);
        std::vector<double> sorted(var);
        const std::size_t mid = (sorted.size() - 1) / 2;  // lower median
        std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(mid),
                         sorted.end());
        const double median = sorted[mid];
        for (std::size_t i = 0; i < var.size(); ++i) {
            background.bits[i] = var[i] > median ? 0 : 1;  // salient = strictly above median
        }
    }
    background = open_then_close(background);
    const double fraction =
        static_cast<double>(background.count()) / static_cast<double>(background.bits.size());
    if (fraction < kMinBackgroundFraction) {
        throw NoBackground("background covers less than 5% of the image");
    }
    return background;
}

PerturbationResult place_patches(const ImageBuffer& image, const BinaryMask& background,
                                 const AdversarialObject& patch, int n, std::uint64_t seed) {
    if (!image.valid()) {
        throw ShapeError("place_patches: invalid image");
    }
    if (background.width != image.width || background.height != image.height) {
        throw ShapeError("background mask does not match image");
    }
    if (n < 1) {
        throw InvalidParameter("patch count must be >= 1");
    }
    if (!patch.patch.valid()) {
        throw ShapeError("adversarial object has an empty patch");
    }

    PerturbationResult result;
    result.image_cf = image;
    result.source_object_id = patch.id;
    result.seed = seed;

    BinaryMask occupied(image.width, image.height);  // union of placed masks
    std::mt19937_64 rng(seed);
    const double image_area = static_cast<double>(image.width) * image.height;
    const double aspect = static_cast<double>(patch.patch.width) / patch.patch.height;

    for (int placed = 0; placed < n; ++placed) {
        bool done = false;
        for (double frac = kPatchAreaStart; frac >= kPatchAreaFloor - 1e-12 && !done;
             frac -= kPatchAreaStep) {
            const double target = frac * image_area;
            int pw = std::max(1, static_cast<int>(std::lround(std::sqrt(target * aspect))));
            int ph = std::max(1, static_cast<int>(std::lround(std::sqrt(target / aspect))));
            pw = std::min(pw, image.width);
            ph = std::min(ph, image.height);
            const RgbaPatch scaled = resize_nearest(patch.patch, pw, ph);

            for (int attempt = 0; attempt < kDrawsPerLevel && !done; ++attempt) {
                const int x0 = static_cast<int>(bounded(rng, image.width - pw + 1));
                const int y0 = static_cast<int>(bounded(rng, image.height - ph + 1));
                // Opaque pixels must land on background and avoid earlier patches.
                bool fits = true;
                for (int y = 0; y < ph && fits; ++y) {
                    for (int x = 0; x < pw && fits; ++x) {
                        if (scaled.at(x, y)[3] < 128) {
                            continue;
                        }
                        if (!background.get(x0 + x, y0 + y) || occupied.get(x0 + x, y0 + y)) {
                            fits = false;
                        }
                    }
                }
                if (!fits) {
                    continue;
                }
                BinaryMask mask(image.width, image.height);
                bool any_opaque = false;
                for (int y = 0; y < ph; ++y) {
                    for (int x = 0; x < pw; ++x) {
                        const std::uint8_t* src = scaled.at(x, y);
                        if (src[3] < 128) {
                            continue;
                        }
                        any_opaque = true;
                        mask.set(x0 + x, y0 + y, true);
                        occupied.set(x0 + x, y0 + y, true);
                        std::uint8_t* dst = result.image_cf.at(x0 + x, y0 + y);
                        dst[0] = src[0];
                        dst[1] = src[1];
                        dst[2] = src[2];
                    }
                }
                if (!any_opaque) {
                    break;  // fully transparent at this scale; shrinking won't help
                }
                result.patch_masks.push_back(std::move(mask));
                done = true;
            }
        }
        if (!done) {
            throw CannotPlacePatches("could not place patch " + std::to_string(placed + 1) +
                                     " of " + std::to_string(n));
        }
    }
    return result;
}

}  // namespace ace
