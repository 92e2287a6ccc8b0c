#pragma once

#include <array>
#include <cmath>

namespace cogen {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{0.0, 0.0, 0.0};
    }
};

struct Mat3 {
    // Row-major.
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return {}; }

    Vec3 operator*(const Vec3& v) const {
        return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
                m[6] * v.x + m[7] * v.y + m[8] * v.z};
    }

    Mat3 operator*(const Mat3& o) const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double acc = 0.0;
                for (int k = 0; k < 3; ++k) acc += m[3 * i + k] * o.m[3 * k + j];
                r.m[3 * i + j] = acc;
            }
        return r;
    }

    Mat3 transposed() const {
        Mat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[3 * i + j] = m[3 * j + i];
        return r;
    }
};

// Rodrigues formula; axis-angle vector with magnitude = rotation angle.
inline Mat3 axis_angle_to_matrix(const Vec3& aa) {
    const double theta = aa.norm();
    if (theta < 1e-12) return Mat3::identity();
    const Vec3 a = aa * (1.0 / theta);
    const double c = std::cos(theta), s = std::sin(theta), t = 1.0 - c;
    Mat3 r;
    r.m = {t * a.x * a.x + c,       t * a.x * a.y - s * a.z, t * a.x * a.z + s * a.y,
           t * a.x * a.y + s * a.z, t * a.y * a.y + c,       t * a.y * a.z - s * a.x,
           t * a.x * a.z - s * a.y, t * a.y * a.z + s * a.x, t * a.z * a.z + c};
    return r;
}

// Inverse Rodrigues; returns axis-angle with angle in [0, pi].
inline Vec3 matrix_to_axis_angle(const Mat3& r) {
    const double tr = r.m[0] + r.m[4] + r.m[8];
    double c = (tr - 1.0) / 2.0;
    c = c > 1.0 ? 1.0 : (c < -1.0 ? -1.0 : c);
    const double theta = std::acos(c);
    if (theta < 1e-12) return {0.0, 0.0, 0.0};
    if (theta > 3.14159265358979 - 1e-6) {
        // Near pi: extract the axis from the symmetric part.
        const double xx = std::sqrt(std::max(0.0, (r.m[0] + 1.0) / 2.0));
        const double yy = std::sqrt(std::max(0.0, (r.m[4] + 1.0) / 2.0));
        const double zz = std::sqrt(std::max(0.0, (r.m[8] + 1.0) / 2.0));
        Vec3 a{xx, yy, zz};
        if (a.x >= a.y && a.x >= a.z) {
            a.y = (r.m[1] + r.m[3]) / (4.0 * (a.x > 0 ? a.x : 1.0));
            a.z = (r.m[2] + r.m[6]) / (4.0 * (a.x > 0 ? a.x : 1.0));
        } else if (a.y >= a.z) {
            a.x = (r.m[1] + r.m[3]) / (4.0 * (a.y > 0 ? a.y : 1.0));
            a.z = (r.m[5] + r.m[7]) / (4.0 * (a.y > 0 ? a.y : 1.0));
        } else {
            a.x = (r.m[2] + r.m[6]) / (4.0 * (a.z > 0 ? a.z : 1.0));
            a.y = (r.m[5] + r.m[7]) / (4.0 * (a.z > 0 ? a.z : 1.0));
        }
        return a.normalized() * theta;
    }
    const double s = 2.0 * std::sin(theta);
    Vec3 axis{(r.m[7] - r.m[5]) / s, (r.m[2] - r.m[6]) / s, (r.m[3] - r.m[1]) / s};
    return axis * theta;
}

struct Rigid {
    Mat3 rot;
    Vec3 trans;

    static Rigid identity() { return {Mat3::identity(), {0, 0, 0}}; }

    Vec3 apply(const Vec3& p) const { return rot * p + trans; }
    Vec3 apply_dir(const Vec3& d) const { return rot * d; }

    Rigid operator*(const Rigid& o) const { return {rot * o.rot, rot * o.trans + trans}; }

    Rigid inverse() const {
        const Mat3 rt = rot.transposed();
        return {rt, -(rt * trans)};
    }
};

}  // namespace cogen
