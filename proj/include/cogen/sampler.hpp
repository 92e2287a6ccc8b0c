#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cogen/model.hpp"
#include "cogen/raster.hpp"

namespace cogen {

// Velocity field over the pair of latents; t in [0,1).
using VelocityFn =
    std::function<std::pair<Tensor, Tensor>(const Tensor& x_motion, const Tensor& x_video, double t)>;

// Uniform-step Euler integration of dx = v dt from t=0 to 1, with the first
// temporal token re-clamped to the clean condition after every step. The
// flow path is a straight line, so Euler integrates a perfect model
// exactly. Undefined clean tensors skip the corresponding branch.
struct EulerState {
    Tensor x_motion, x_video;
};
EulerState euler_integrate(const VelocityFn& v, Tensor x_motion, Tensor x_video,
                           const Tensor& clean_motion, const Tensor& clean_video, int steps);

// Overwrites temporal token 0 of x with the same token of clean.
void clamp_clean_token(Tensor& x, const Tensor& clean);

struct SampleInputs {
    PoseVector m0;
    RgbFrame s0;
    MotionFrame k0;
    std::vector<std::int64_t> cond_ids;
    int steps = 50;
    double cfg_scale = 6.0;
    std::optional<std::uint64_t> seed;  // required; unseeded calls are rejected
};

struct SampleOutput {
    Tensor video_frames;   // [F,H,W,3], unclamped
    Tensor motion_frames;  // [F,H,W,3]; undefined when the motion branch is off
    std::vector<PoseVector> motion;  // F poses, motion[0] == m0
};

// Full sampling pass: seeds both latents, zero-pads the condition frame to
// F frames for encoding, integrates with classifier-free guidance
// (cfg_scale == 1 skips the unconditional pass, which also makes the
// identity exact), and reads the final 3D motion from the last denoising
// step with all layers selected.
SampleOutput sample(const DualModelParams& m, const SampleInputs& in);

}  // namespace cogen
