#pragma once

#include <cstdint>
#include <vector>

#include "cogen/tensor.hpp"

namespace cogen {

// Parameter-free, exactly invertible stand-in for a frozen video VAE with
// temporal compression 4 (standalone first frame) and spatial compression
// 16. A 16x16x3 pixel patch over 4 frames folds into 3072 channels, so the
// latent geometry is C x ((F-1)/4 + 1) x H/16 x W/16.

constexpr std::int64_t kLatentChannels = 3 * 4 * 16 * 16;  // 3072
constexpr int kTemporalStride = 4;
constexpr int kSpatialStride = 16;

struct LatentBlock {
    Tensor data;  // [C, T, h, w]
    std::int64_t frames = 0, height = 0, width = 0;  // pixel-space provenance

    std::int64_t temporal() const { return data.dim(1); }
    void validate() const;
};

// Latent shape for given pixel dimensions without allocating anything.
Shape latent_shape(std::int64_t frames, std::int64_t height, std::int64_t width);

// frames: [F, H, W, 3] with values in [0,1]; F = 1 (mod 4), F >= 5; H, W
// multiples of 16. Frame 0 is replicated 4x into the first temporal token;
// groups of 4 frames fill the rest. Channel packing order within a spatial
// cell: time-major, then y, then x, then color. Values are mapped affinely
// from [0,1] to [-1,1].
LatentBlock encode_pixels(const Tensor& frames);

// Exact inverse of encode_pixels; frame 0 is taken from the first replicate.
// Values are clamped to [0,1] only by callers at export time.
Tensor decode_pixels(const LatentBlock& latent);

}  // namespace cogen
