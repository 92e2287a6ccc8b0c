#include "cogen/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cogen/error.hpp"

namespace cogen {

namespace {
constexpr double kNearPlane = 1e-4;
}

void Camera::validate() const {
    if (focal <= 0.0) throw ShapeError("camera focal length must be positive");
    if (height <= 0 || width <= 0 || height % 16 != 0 || width % 16 != 0)
        throw ShapeError("camera image size must be positive multiples of 16, got " +
                         std::to_string(height) + "x" + std::to_string(width));
}

Camera frontal_camera(int height, int width, double focal, const Vec3& target, double dist) {
    Camera cam;
    cam.height = height;
    cam.width = width;
    cam.focal = focal;
    cam.cx = width / 2.0;
    cam.cy = height / 2.0;
    // Looking along world -z; +x right, world +y maps to image up.
    Mat3 r;
    r.m = {1, 0, 0, 0, -1, 0, 0, 0, -1};
    const Vec3 position = target + Vec3{0, 0, dist};
    cam.world_to_cam.rot = r;
    cam.world_to_cam.trans = -(r * position);
    cam.validate();
    return cam;
}

ProjectedPoint project(const Camera& camera, const Vec3& world_point) {
    const Vec3 pc = camera.world_to_cam.apply(world_point);
    ProjectedPoint out;
    out.depth = pc.z;
    if (pc.z <= kNearPlane) return out;  // behind near plane: unprojectable
    out.x = camera.focal * pc.x / pc.z + camera.cx;
    out.y = camera.focal * pc.y / pc.z + camera.cy;
    out.ok = true;
    return out;
}

double snap_unit(double v) {
    const double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return std::round(c * 1048576.0) / 1048576.0;  // 2^20
}

double MotionFrame::coverage_ratio() const {
    std::size_t covered = 0;
    for (auto c : coverage) covered += c ? 1u : 0u;
    return coverage.empty() ? 0.0 : static_cast<double>(covered) / static_cast<double>(coverage.size());
}

namespace {

struct Fragment {
    double depth;
    Vec3 normal;  // camera space, interpolated and renormalized
    int part;
};

// Shared triangle scan. Emits one fragment per covered pixel with the
// interpolated camera-space normal; `emit` decides the z-test and write.
template <typename Emit>
void scan_mesh(const BodyMesh& mesh, const Camera& camera, Emit&& emit) {
    const Mat3& rot = camera.world_to_cam.rot;
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& face = mesh.faces[f];
        Vec3 pc[3], nc[3];
        bool in_front = true;
        for (int k = 0; k < 3; ++k) {
            pc[k] = camera.world_to_cam.apply(mesh.vertices[static_cast<std::size_t>(face[k])]);
            nc[k] = rot * mesh.vertex_normals[static_cast<std::size_t>(face[k])];
            in_front = in_front && pc[k].z > kNearPlane;
        }
        if (!in_front) continue;
        if (nc[0].z > 0.0 && nc[1].z > 0.0 && nc[2].z > 0.0) continue;  // back-facing

        double sx[3], sy[3];
        for (int k = 0; k < 3; ++k) {
            sx[k] = camera.focal * pc[k].x / pc[k].z + camera.cx;
            sy[k] = camera.focal * pc[k].y / pc[k].z + camera.cy;
        }
        const double area = (sx[1] - sx[0]) * (sy[2] - sy[0]) - (sy[1] - sy[0]) * (sx[2] - sx[0]);
        if (area == 0.0) continue;

        const int x0 = std::max(0, static_cast<int>(std::floor(std::min({sx[0], sx[1], sx[2]}))));
        const int x1 = std::min(camera.width - 1,
                                static_cast<int>(std::ceil(std::max({sx[0], sx[1], sx[2]}))));
        const int y0 = std::max(0, static_cast<int>(std::floor(std::min({sy[0], sy[1], sy[2]}))));
        const int y1 = std::min(camera.height - 1,
                                static_cast<int>(std::ceil(std::max({sy[0], sy[1], sy[2]}))));

        for (int py = y0; py <= y1; ++py) {
            for (int px = x0; px <= x1; ++px) {
                const double cxp = px + 0.5, cyp = py + 0.5;
                const double e0 = (sx[2] - sx[1]) * (cyp - sy[1]) - (sy[2] - sy[1]) * (cxp - sx[1]);
                const double e1 = (sx[0] - sx[2]) * (cyp - sy[2]) - (sy[0] - sy[2]) * (cxp - sx[2]);
                const double e2 = (sx[1] - sx[0]) * (cyp - sy[0]) - (sy[1] - sy[0]) * (cxp - sx[0]);
                double l0 = e0 / area, l1 = e1 / area, l2 = e2 / area;
                if (l0 < 0.0 || l1 < 0.0 || l2 < 0.0) continue;

                // Perspective-correct weights.
                const double w0 = l0 / pc[0].z, w1 = l1 / pc[1].z, w2 = l2 / pc[2].z;
                const double wsum = w0 + w1 + w2;
                const double depth = 1.0 / wsum;
                Vec3 n = (nc[0] * w0 + nc[1] * w1 + nc[2] * w2) * depth;
                const double nl = n.norm();
                if (nl < 1e-12) continue;  // fold-over fragment, ignore
                n = n * (1.0 / nl);
                emit(px, py, Fragment{depth, n, mesh.face_parts[f]});
            }
        }
    }
}

}  // namespace

MotionFrame rasterize_motion_frame(const BodyMesh& mesh, const Camera& camera,
                                   const PartPalette& palette) {
    camera.validate();
    MotionFrame frame;
    frame.height = camera.height;
    frame.width = camera.width;
    frame.pixels.assign(static_cast<std::size_t>(camera.height) * camera.width * 3, 0.0);
    frame.coverage.assign(static_cast<std::size_t>(camera.height) * camera.width, 0);
    std::vector<double> zbuf(static_cast<std::size_t>(camera.height) * camera.width,
                             std::numeric_limits<double>::infinity());

    scan_mesh(mesh, camera, [&](int px, int py, const Fragment& frag) {
        const std::size_t idx = static_cast<std::size_t>(py) * camera.width + px;
        if (frag.depth >= zbuf[idx]) return;
        zbuf[idx] = frag.depth;
        const MotionColor c = encode_color(frag.normal, frag.part, palette);
        frame.pixels[idx * 3 + 0] = snap_unit(c.red);
        frame.pixels[idx * 3 + 1] = snap_unit(c.green);
        frame.pixels[idx * 3 + 2] = snap_unit(c.blue);
        frame.coverage[idx] = 1;
    });
    return frame;
}

RgbFrame render_shaded_frame(const BodyMesh& mesh, const Camera& camera, const Vec3& light_dir,
                             const std::vector<Vec3>& albedo_per_part) {
    camera.validate();
    RgbFrame frame;
    frame.height = camera.height;
    frame.width = camera.width;
    const double bg = snap_unit(0.35);
    frame.pixels.assign(static_cast<std::size_t>(camera.height) * camera.width * 3, bg);
    std::vector<double> zbuf(static_cast<std::size_t>(camera.height) * camera.width,
                             std::numeric_limits<double>::infinity());
    const Vec3 light = light_dir.normalized();
    const Mat3 cam_to_world_rot = camera.world_to_cam.rot.transposed();

    scan_mesh(mesh, camera, [&](int px, int py, const Fragment& frag) {
        const std::size_t idx = static_cast<std::size_t>(py) * camera.width + px;
        if (frag.depth >= zbuf[idx]) return;
        zbuf[idx] = frag.depth;
        const Vec3 n_world = cam_to_world_rot * frag.normal;
        const double lam = std::max(0.0, n_world.dot(-light));
        const Vec3& alb = albedo_per_part[static_cast<std::size_t>(frag.part)];
        frame.pixels[idx * 3 + 0] = snap_unit(alb.x * lam + 0.15);
        frame.pixels[idx * 3 + 1] = snap_unit(alb.y * lam + 0.15);
        frame.pixels[idx * 3 + 2] = snap_unit(alb.z * lam + 0.15);
    });
    return frame;
}

}  // namespace cogen
