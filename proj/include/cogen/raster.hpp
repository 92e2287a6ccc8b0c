#pragma once

#include <cstdint>
#include <vector>

#include "cogen/body.hpp"
#include "cogen/geometry.hpp"
#include "cogen/motion_codec.hpp"

namespace cogen {

// Pinhole camera. Camera space: +z forward, +x right, +y down (image rows
// grow downward). H and W must be multiples of 16 to satisfy the latent
// geometry.
struct Camera {
    double focal = 70.0;           // pixels
    double cx = 32.0, cy = 32.0;   // principal point, pixels
    Rigid world_to_cam;
    int height = 64, width = 64;

    void validate() const;
};

// Frontal camera at distance `dist` looking along world -z, image up = world up.
Camera frontal_camera(int height, int width, double focal, const Vec3& target, double dist);

struct ProjectedPoint {
    double x = 0.0, y = 0.0;  // pixels
    double depth = 0.0;       // camera-space z
    bool ok = false;          // false when behind the near plane
};

ProjectedPoint project(const Camera& camera, const Vec3& world_point);

// Frame pixels are quantized to the 2^-20 grid: exactly representable in
// f32 for serialization and exactly invertible through the latent codec's
// affine map.
double snap_unit(double v);

struct MotionFrame {
    int height = 0, width = 0;
    std::vector<double> pixels;        // H*W*3, rgb in [0,1]; background exactly (0,0,0)
    std::vector<std::uint8_t> coverage;  // H*W

    double coverage_ratio() const;
    const double* rgb(int y, int x) const { return &pixels[(static_cast<std::size_t>(y) * width + x) * 3]; }
};

struct RgbFrame {
    int height = 0, width = 0;
    std::vector<double> pixels;  // H*W*3 in [0,1]

    const double* rgb(int y, int x) const { return &pixels[(static_cast<std::size_t>(y) * width + x) * 3]; }
};

// Z-buffered rasterization of the motion representation: per-pixel
// perspective-correct normal interpolation (renormalized), per-face part
// label, colors from encode_color. Back faces (camera-space normal z > 0 at
// all vertices) are culled. A single frame is filled by one worker; callers
// parallelize across frames.
MotionFrame rasterize_motion_frame(const BodyMesh& mesh, const Camera& camera,
                                   const PartPalette& palette);

// Lambertian shading: albedo[part] * max(0, dot(n, -light)) + 0.15 ambient,
// clamped; background gray 0.35.
RgbFrame render_shaded_frame(const BodyMesh& mesh, const Camera& camera, const Vec3& light_dir,
                             const std::vector<Vec3>& albedo_per_part);

}  // namespace cogen
