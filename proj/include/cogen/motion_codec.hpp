#pragma once

#include <vector>

#include "cogen/geometry.hpp"

namespace cogen {

// Color codec packing a unit surface normal and a body part label into one
// RGB triple. Blue and Green carry the normal's x and y; Red carries the
// part index interleaved with the sign of the normal's z, drawn from a list
// of 2R candidate values uniformly spaced in [0,1].

struct PartPalette {
    int part_count = 0;
    std::vector<double> red_list;  // 2R strictly increasing values in [0,1]
};

struct MotionColor {
    double red = 0.0, green = 0.0, blue = 0.0;
};

struct DecodedColor {
    Vec3 normal;      // unit length
    int part = 0;
    int sign = 1;     // sign chosen for normal.z
    bool feasible = true;  // false when blue/green lie outside the unit disc
};

// red_list[k] = k / (2R - 1). R is capped at 32 so the candidate gap stays
// above 4/255 and 8-bit quantization cannot flip nearest-candidate decoding.
PartPalette build_palette(int part_count);

// Requires |norm(vn) - 1| <= 1e-4 and 0 <= part < R. sign(vn_z) >= 0 picks
// the even candidate 2*part, negative z the odd candidate 2*part+1.
MotionColor encode_color(const Vec3& vn, int part, const PartPalette& palette);

// Nearest red candidate decides part and sign (ties toward the lower
// index); z is reconstructed from the unit-norm identity. Colors whose
// x/y components land outside the unit disc by more than 0.05 are decoded
// with z = 0 and flagged infeasible.
DecodedColor decode_color(const MotionColor& c, const PartPalette& palette);

// 8-bit helpers for PNG round trips.
inline int quantize8(double v) {
    const double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return static_cast<int>(c * 255.0 + 0.5);
}
inline double dequantize8(int q) { return static_cast<double>(q) / 255.0; }

}  // namespace cogen
