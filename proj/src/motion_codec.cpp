#include "cogen/motion_codec.hpp"

#include <cmath>
#include <string>

#include "cogen/error.hpp"

namespace cogen {

PartPalette build_palette(int part_count) {
    if (part_count < 1 || part_count > 32)
        throw ShapeError("palette part count " + std::to_string(part_count) +
                         " outside [1,32]; 8-bit decodability requires gap > 4/255");
    PartPalette p;
    p.part_count = part_count;
    const int n = 2 * part_count;
    p.red_list.resize(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
        p.red_list[static_cast<std::size_t>(k)] = static_cast<double>(k) / (n - 1);
    return p;
}

MotionColor encode_color(const Vec3& vn, int part, const PartPalette& palette) {
    if (std::abs(vn.norm() - 1.0) > 1e-4)
        throw ShapeError("encode_color: normal is not unit length");
    if (part < 0 || part >= palette.part_count)
        throw ShapeError("encode_color: part index " + std::to_string(part) + " out of range");
    MotionColor c;
    c.blue = (vn.x + 1.0) / 2.0;
    c.green = (vn.y + 1.0) / 2.0;
    // sign(0) counts as non-negative: -0.0 >= 0 is true, matching the
    // front-facing branch.
    const int k = vn.z >= 0.0 ? 2 * part : 2 * part + 1;
    c.red = palette.red_list[static_cast<std::size_t>(k)];
    return c;
}

DecodedColor decode_color(const MotionColor& c, const PartPalette& palette) {
    if (c.red < 0.0 || c.red > 1.0 || c.green < 0.0 || c.green > 1.0 || c.blue < 0.0 || c.blue > 1.0)
        throw ShapeError("decode_color: channels must lie in [0,1]");
    DecodedColor d;
    const double nx = 2.0 * c.blue - 1.0;
    const double ny = 2.0 * c.green - 1.0;

    int best = 0;
    double best_dist = std::abs(c.red - palette.red_list[0]);
    for (std::size_t k = 1; k < palette.red_list.size(); ++k) {
        const double dist = std::abs(c.red - palette.red_list[k]);
        if (dist < best_dist) {  // strict: ties keep the lower index
            best_dist = dist;
            best = static_cast<int>(k);
        }
    }
    d.part = best / 2;
    d.sign = (best % 2 == 0) ? 1 : -1;

    const double sq = nx * nx + ny * ny;
    if (sq > 1.0 + 0.05) {
        d.feasible = false;
        d.normal = Vec3{nx, ny, 0.0}.normalized();
        return d;
    }
    const double nz = static_cast<double>(d.sign) * std::sqrt(std::max(0.0, 1.0 - sq));
    d.normal = Vec3{nx, ny, nz}.normalized();
    return d;
}

}  // namespace cogen
