#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ace/image.hpp"
#include "ace/library.hpp"

namespace ace {

struct PerturbationResult {
    ImageBuffer image_cf;
    std::vector<BinaryMask> patch_masks;  // pairwise disjoint, each inside the background
    std::string source_object_id;
    std::uint64_t seed = 0;
};

// Background extraction. With a subject mask, background is its complement
// after a 3x3 morphological open-then-close (one pass each). Without one,
// saliency is the per-pixel intensity variance over a 5x5 window thresholded
// strictly above the image's lower-median variance; background is the
// complement of that saliency mask, then open-then-close. Morphology windows
// consider only in-bounds neighbors. Throws NoBackground when the result
// covers less than 5% of the pixels.
BinaryMask extract_background_mask(const ImageBuffer& image,
                                   const std::optional<BinaryMask>& subject_mask = std::nullopt);

// Pastes n non-overlapping copies of the patch into the background. Each copy
// is scaled so its bounding box covers 8% of the image area, stepping down
// 1% at a time to a 2% floor when a level cannot be placed (200 seeded anchor
// draws per level). Patch alpha is binarized at 0.5 (>=128) to form the mask;
// every pixel outside the union of masks is byte-identical to the input.
PerturbationResult place_patches(const ImageBuffer& image, const BinaryMask& background,
                                 const AdversarialObject& patch, int n, std::uint64_t seed);

}  // namespace ace
