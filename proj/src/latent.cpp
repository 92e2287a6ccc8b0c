#include "cogen/latent.hpp"

#include <string>

#include "cogen/error.hpp"

namespace cogen {

void LatentBlock::validate() const {
    if (!data.defined() || data.ndim() != 4) throw ShapeError("latent block must be rank 4");
    const Shape expect = latent_shape(frames, height, width);
    if (data.shape() != expect)
        throw ShapeError("latent shape " + shape_str(data.shape()) + " does not match provenance " +
                         shape_str(expect));
}

Shape latent_shape(std::int64_t frames, std::int64_t height, std::int64_t width) {
    if (frames < 5 || (frames - 1) % kTemporalStride != 0)
        throw ShapeError("frame count must satisfy F = 1 (mod 4), F >= 5; got " +
                         std::to_string(frames));
    if (height <= 0 || width <= 0 || height % kSpatialStride != 0 || width % kSpatialStride != 0)
        throw ShapeError("H and W must be positive multiples of 16");
    return {kLatentChannels, (frames - 1) / kTemporalStride + 1, height / kSpatialStride,
            width / kSpatialStride};
}

namespace {

// Latent channel for (sub-frame dt, patch-local py, px, color c):
// time-major, then y, x, color.
inline std::int64_t channel_of(int dt, int py, int px, int c) {
    return ((static_cast<std::int64_t>(dt) * kSpatialStride + py) * kSpatialStride + px) * 3 + c;
}

}  // namespace

LatentBlock encode_pixels(const Tensor& frames) {
    if (frames.ndim() != 4 || frames.dim(3) != 3)
        throw ShapeError("encode_pixels expects [F, H, W, 3], got " + shape_str(frames.shape()));
    const std::int64_t f = frames.dim(0), h = frames.dim(1), w = frames.dim(2);
    const Shape lshape = latent_shape(f, h, w);
    const std::int64_t t_lat = lshape[1], gh = lshape[2], gw = lshape[3];

    LatentBlock block;
    block.frames = f;
    block.height = h;
    block.width = w;
    block.data = Tensor::zeros(lshape);

    const double* src = frames.data();
    double* dst = block.data.mutable_data();
    const std::int64_t plane = t_lat * gh * gw;

#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t t = 0; t < t_lat; ++t) {
        for (std::int64_t gy = 0; gy < gh; ++gy) {
            for (std::int64_t gx = 0; gx < gw; ++gx) {
                const std::int64_t cell = (t * gh + gy) * gw + gx;
                for (int dt = 0; dt < kTemporalStride; ++dt) {
                    // Group 0 holds frame 0 replicated; group g holds frames 4g-3..4g.
                    const std::int64_t fi = t == 0 ? 0 : (t - 1) * kTemporalStride + 1 + dt;
                    for (int py = 0; py < kSpatialStride; ++py) {
                        const std::int64_t row = gy * kSpatialStride + py;
                        const double* sp = src + ((fi * h + row) * w + gx * kSpatialStride) * 3;
                        for (int px = 0; px < kSpatialStride; ++px) {
                            for (int c = 0; c < 3; ++c) {
                                const std::int64_t ch = channel_of(dt, py, px, c);
                                dst[ch * plane + cell] = 2.0 * sp[px * 3 + c] - 1.0;
                            }
                        }
                    }
                }
            }
        }
    }
    return block;
}

Tensor decode_pixels(const LatentBlock& latent) {
    latent.validate();
    const std::int64_t f = latent.frames, h = latent.height, w = latent.width;
    const std::int64_t t_lat = latent.data.dim(1), gh = latent.data.dim(2), gw = latent.data.dim(3);
    Tensor frames = Tensor::zeros({f, h, w, 3});
    const double* src = latent.data.data();
    double* dst = frames.mutable_data();
    const std::int64_t plane = t_lat * gh * gw;

#pragma omp parallel for collapse(2) schedule(static)
    for (std::int64_t t = 0; t < t_lat; ++t) {
        for (std::int64_t gy = 0; gy < gh; ++gy) {
            for (std::int64_t gx = 0; gx < gw; ++gx) {
                const std::int64_t cell = (t * gh + gy) * gw + gx;
                const int sub = t == 0 ? 1 : kTemporalStride;  // frame 0: first replicate only
                for (int dt = 0; dt < sub; ++dt) {
                    const std::int64_t fi = t == 0 ? 0 : (t - 1) * kTemporalStride + 1 + dt;
                    for (int py = 0; py < kSpatialStride; ++py) {
                        const std::int64_t row = gy * kSpatialStride + py;
                        double* dp = dst + ((fi * h + row) * w + gx * kSpatialStride) * 3;
                        for (int px = 0; px < kSpatialStride; ++px) {
                            for (int c = 0; c < 3; ++c) {
                                const std::int64_t ch = channel_of(dt, py, px, c);
                                dp[px * 3 + c] = (src[ch * plane + cell] + 1.0) / 2.0;
                            }
                        }
                    }
                }
            }
        }
    }
    return frames;
}

}  // namespace cogen
