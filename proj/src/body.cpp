#include "cogen/body.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cogen/error.hpp"

namespace cogen {

using nlohmann::json;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void Skeleton::validate() const {
    if (joints.empty()) throw ShapeError("skeleton has no joints");
    if (joints[0].parent != -1) throw ShapeError("joint 0 must be the root (parent -1)");
    for (std::size_t j = 1; j < joints.size(); ++j) {
        if (joints[j].parent < 0 || joints[j].parent >= static_cast<int>(j))
            throw ShapeError("joint " + std::to_string(j) + " breaks topological parent order");
    }
    if (parts.size() > joints.size()) throw ShapeError("more parts than joints");
    for (const auto& p : parts) {
        if (p.joint < 0 || p.joint >= joint_count())
            throw ShapeError("part '" + p.name + "' references invalid joint");
        if (p.radius <= 0.0) throw ShapeError("part '" + p.name + "' has non-positive radius");
        if (p.length < 0.0) throw ShapeError("part '" + p.name + "' has negative length");
        if (p.segments < 3 || p.rings < 1) throw ShapeError("part '" + p.name + "' under-tessellated");
    }
}

void PoseVector::validate(int expected_joints) const {
    if (static_cast<int>(rotations.size()) != expected_joints)
        throw ShapeError("pose has " + std::to_string(rotations.size()) + " rotations, skeleton has " +
                         std::to_string(expected_joints) + " joints");
    auto finite = [](const Vec3& v) {
        return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
    };
    if (!finite(root_translation)) throw ShapeError("pose root translation not finite");
    for (const auto& r : rotations) {
        if (!finite(r)) throw ShapeError("pose rotation not finite");
        if (r.norm() >= kPi + 1e-6)
            throw ShapeError("pose rotation magnitude exceeds pi; canonicalize first");
    }
}

JointTransforms forward_kinematics(const Skeleton& skeleton, const PoseVector& pose) {
    pose.validate(skeleton.joint_count());
    JointTransforms out(skeleton.joints.size());
    for (std::size_t j = 0; j < skeleton.joints.size(); ++j) {
        const Joint& joint = skeleton.joints[j];
        Rigid local{axis_angle_to_matrix(pose.rotations[j]), joint.rest_offset};
        if (joint.parent < 0) {
            local.trans = local.trans + pose.root_translation;
            out[j] = local;
        } else {
            out[j] = out[static_cast<std::size_t>(joint.parent)] * local;
        }
    }
    return out;
}

namespace {

void orthonormal_basis(const Vec3& a, Vec3& u, Vec3& v) {
    const Vec3 pick = std::abs(a.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    u = a.cross(pick).normalized();
    v = a.cross(u);
}

// Capsule around the segment [0, length*axis]: two hemispheres stitched to a
// cylindrical band split at mid-length so the equator ring is symmetric.
void tessellate_capsule(const BodyPart& part, const Rigid& world, int part_index, BodyMesh& mesh) {
    const Vec3 a = part.axis.normalized();
    Vec3 u, v;
    orthonormal_basis(a, u, v);
    const int seg = part.segments;
    const int rg = part.rings;
    const double r = part.radius;
    const double len = part.length;

    const auto base = static_cast<std::int64_t>(mesh.vertices.size());
    std::vector<std::int64_t> rows;  // first index of each full ring row

    auto push_vertex = [&](const Vec3& local) {
        mesh.vertices.push_back(world.apply(local));
        mesh.vertex_parts.push_back(part_index);
    };

    // South pole.
    push_vertex(a * (-r));
    const std::int64_t south_pole = base;

    // South hemisphere rings (pole angle alpha in (0, pi/2]).
    for (int i = 1; i <= rg; ++i) {
        rows.push_back(static_cast<std::int64_t>(mesh.vertices.size()));
        const double alpha = (kPi / 2.0) * static_cast<double>(i) / rg;
        for (int s = 0; s < seg; ++s) {
            const double th = 2.0 * kPi * s / seg;
            const Vec3 radial = u * std::cos(th) + v * std::sin(th);
            push_vertex(a * (-r * std::cos(alpha)) + radial * (r * std::sin(alpha)));
        }
    }
    // Cylinder rows at mid and top (the bottom row is the south equator).
    const int bands = len > 0.0 ? 2 : 0;
    for (int k = 1; k <= bands; ++k) {
        rows.push_back(static_cast<std::int64_t>(mesh.vertices.size()));
        const double h = len * static_cast<double>(k) / bands;
        for (int s = 0; s < seg; ++s) {
            const double th = 2.0 * kPi * s / seg;
            const Vec3 radial = u * std::cos(th) + v * std::sin(th);
            push_vertex(a * h + radial * r);
        }
    }
    // North hemisphere rings (elevation in (0, pi/2)).
    for (int i = 1; i < rg; ++i) {
        rows.push_back(static_cast<std::int64_t>(mesh.vertices.size()));
        const double e = (kPi / 2.0) * static_cast<double>(i) / rg;
        for (int s = 0; s < seg; ++s) {
            const double th = 2.0 * kPi * s / seg;
            const Vec3 radial = u * std::cos(th) + v * std::sin(th);
            push_vertex(a * (len + r * std::sin(e)) + radial * (r * std::cos(e)));
        }
    }
    // North pole.
    const std::int64_t north_pole = static_cast<std::int64_t>(mesh.vertices.size());
    push_vertex(a * (len + r));

    // Orient every face outward: away from the capsule core segment.
    auto add_face = [&](std::int64_t i0, std::int64_t i1, std::int64_t i2) {
        const Vec3 p0 = mesh.vertices[static_cast<std::size_t>(i0)];
        const Vec3 p1 = mesh.vertices[static_cast<std::size_t>(i1)];
        const Vec3 p2 = mesh.vertices[static_cast<std::size_t>(i2)];
        const Vec3 centroid = (p0 + p1 + p2) * (1.0 / 3.0);
        const Vec3 o = world.trans;
        const Vec3 wa = world.apply_dir(a);
        double t = (centroid - o).dot(wa);
        t = t < 0.0 ? 0.0 : (t > len ? len : t);
        const Vec3 core = o + wa * t;
        const Vec3 n = (p1 - p0).cross(p2 - p0);
        if (n.dot(centroid - core) >= 0.0)
            mesh.faces.push_back({i0, i1, i2});
        else
            mesh.faces.push_back({i0, i2, i1});
        mesh.face_parts.push_back(part_index);
    };

    // Pole fans.
    for (int s = 0; s < seg; ++s) {
        add_face(south_pole, rows.front() + s, rows.front() + (s + 1) % seg);
        add_face(north_pole, rows.back() + s, rows.back() + (s + 1) % seg);
    }
    // Quad strips between consecutive rows.
    for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
        for (int s = 0; s < seg; ++s) {
            const std::int64_t a0 = rows[k] + s;
            const std::int64_t a1 = rows[k] + (s + 1) % seg;
            const std::int64_t b0 = rows[k + 1] + s;
            const std::int64_t b1 = rows[k + 1] + (s + 1) % seg;
            add_face(a0, a1, b0);
            add_face(a1, b1, b0);
        }
    }
}

}  // namespace

int compute_vertex_normals(const std::vector<Vec3>& vertices,
                           const std::vector<std::array<std::int64_t, 3>>& faces,
                           std::vector<Vec3>& out_normals) {
    out_normals.assign(vertices.size(), Vec3{0, 0, 0});
    for (const auto& f : faces) {
        const Vec3& p0 = vertices[static_cast<std::size_t>(f[0])];
        const Vec3& p1 = vertices[static_cast<std::size_t>(f[1])];
        const Vec3& p2 = vertices[static_cast<std::size_t>(f[2])];
        // Raw cross product magnitude is twice the face area, so summing it
        // yields the area weighting directly.
        const Vec3 fn = (p1 - p0).cross(p2 - p0);
        for (int k = 0; k < 3; ++k) out_normals[static_cast<std::size_t>(f[k])] = out_normals[static_cast<std::size_t>(f[k])] + fn;
    }
    int flagged = 0;
    for (auto& n : out_normals) {
        const double len = n.norm();
        if (len < 1e-12) {
            n = Vec3{0, 0, 1};
            ++flagged;
        } else {
            n = n * (1.0 / len);
        }
    }
    return flagged;
}

BodyMesh skin_mesh(const Skeleton& skeleton, const JointTransforms& transforms) {
    skeleton.validate();
    if (transforms.size() != skeleton.joints.size())
        throw ShapeError("transform count does not match skeleton joints");
    BodyMesh mesh;
    for (std::size_t pi = 0; pi < skeleton.parts.size(); ++pi) {
        const BodyPart& part = skeleton.parts[pi];
        tessellate_capsule(part, transforms[static_cast<std::size_t>(part.joint)],
                           static_cast<int>(pi), mesh);
    }
    mesh.flagged_normals = compute_vertex_normals(mesh.vertices, mesh.faces, mesh.vertex_normals);
    return mesh;
}

PoseVector rest_pose(const Skeleton& skeleton) {
    PoseVector p;
    p.rotations.assign(skeleton.joints.size(), Vec3{0, 0, 0});
    p.root_translation = {0, 0, 0};
    return p;
}

Skeleton toy_skeleton8() {
    Skeleton s;
    auto J = [&](const char* name, int parent, Vec3 off) {
        s.joints.push_back({parent, off, name});
    };
    J("pelvis", -1, {0.0, 0.90, 0.0});
    J("torso", 0, {0.0, 0.15, 0.0});
    J("neck", 1, {0.0, 0.38, 0.0});
    J("head", 2, {0.0, 0.09, 0.0});
    J("l_arm", 1, {0.20, 0.33, 0.0});
    J("r_arm", 1, {-0.20, 0.33, 0.0});
    J("l_leg", 0, {0.11, -0.04, 0.0});
    J("r_leg", 0, {-0.11, -0.04, 0.0});

    auto P = [&](const char* name, int joint, Vec3 axis, double radius, double length) {
        BodyPart p;
        p.name = name;
        p.joint = joint;
        p.axis = axis;
        p.radius = radius;
        p.length = length;
        s.parts.push_back(p);
    };
    P("pelvis", 0, {0, 1, 0}, 0.12, 0.10);
    P("torso", 1, {0, 1, 0}, 0.13, 0.30);
    P("neck", 2, {0, 1, 0}, 0.05, 0.07);
    P("head", 3, {0, 1, 0}, 0.10, 0.05);
    P("l_arm", 4, {0, -1, 0}, 0.055, 0.48);
    P("r_arm", 5, {0, -1, 0}, 0.055, 0.48);
    P("l_leg", 6, {0, -1, 0}, 0.075, 0.72);
    P("r_leg", 7, {0, -1, 0}, 0.075, 0.72);
    s.validate();
    return s;
}

Skeleton toy_skeleton24() {
    Skeleton s;
    auto J = [&](const char* name, int parent, Vec3 off) {
        s.joints.push_back({parent, off, name});
    };
    // SMPL-cardinality chain with rough humanoid offsets.
    J("pelvis", -1, {0.0, 0.95, 0.0});   // 0
    J("l_hip", 0, {0.09, -0.06, 0.0});   // 1
    J("r_hip", 0, {-0.09, -0.06, 0.0});  // 2
    J("spine1", 0, {0.0, 0.10, 0.0});    // 3
    J("l_knee", 1, {0.0, -0.38, 0.0});   // 4
    J("r_knee", 2, {0.0, -0.38, 0.0});   // 5
    J("spine2", 3, {0.0, 0.12, 0.0});    // 6
    J("l_ankle", 4, {0.0, -0.40, 0.0});  // 7
    J("r_ankle", 5, {0.0, -0.40, 0.0});  // 8
    J("spine3", 6, {0.0, 0.12, 0.0});    // 9
    J("l_foot", 7, {0.0, -0.05, 0.08});  // 10
    J("r_foot", 8, {0.0, -0.05, 0.08});  // 11
    J("neck", 9, {0.0, 0.12, 0.0});      // 12
    J("l_collar", 9, {0.07, 0.08, 0.0}); // 13
    J("r_collar", 9, {-0.07, 0.08, 0.0}); // 14
    J("head", 12, {0.0, 0.08, 0.0});     // 15
    J("l_shoulder", 13, {0.10, 0.0, 0.0}); // 16
    J("r_shoulder", 14, {-0.10, 0.0, 0.0}); // 17
    J("l_elbow", 16, {0.0, -0.26, 0.0}); // 18
    J("r_elbow", 17, {0.0, -0.26, 0.0}); // 19
    J("l_wrist", 18, {0.0, -0.24, 0.0}); // 20
    J("r_wrist", 19, {0.0, -0.24, 0.0}); // 21
    J("l_hand", 20, {0.0, -0.06, 0.0});  // 22
    J("r_hand", 21, {0.0, -0.06, 0.0});  // 23

    auto P = [&](const char* name, int joint, Vec3 axis, double radius, double length) {
        BodyPart p;
        p.name = name;
        p.joint = joint;
        p.axis = axis;
        p.radius = radius;
        p.length = length;
        p.segments = 10;
        p.rings = 3;
        s.parts.push_back(p);
    };
    P("pelvis", 0, {0, 1, 0}, 0.11, 0.08);
    P("l_hip", 1, {0, -1, 0}, 0.07, 0.32);
    P("r_hip", 2, {0, -1, 0}, 0.07, 0.32);
    P("spine1", 3, {0, 1, 0}, 0.11, 0.10);
    P("l_knee", 4, {0, -1, 0}, 0.06, 0.34);
    P("r_knee", 5, {0, -1, 0}, 0.06, 0.34);
    P("spine2", 6, {0, 1, 0}, 0.12, 0.10);
    P("l_ankle", 7, {0, 0, 1}, 0.04, 0.10);
    P("r_ankle", 8, {0, 0, 1}, 0.04, 0.10);
    P("spine3", 9, {0, 1, 0}, 0.12, 0.10);
    P("l_foot", 10, {0, 0, 1}, 0.035, 0.08);
    P("r_foot", 11, {0, 0, 1}, 0.035, 0.08);
    P("neck", 12, {0, 1, 0}, 0.05, 0.06);
    P("l_collar", 13, {1, 0, 0}, 0.05, 0.08);
    P("r_collar", 14, {-1, 0, 0}, 0.05, 0.08);
    P("head", 15, {0, 1, 0}, 0.10, 0.06);
    P("l_shoulder", 16, {0, -1, 0}, 0.05, 0.22);
    P("r_shoulder", 17, {0, -1, 0}, 0.05, 0.22);
    P("l_elbow", 18, {0, -1, 0}, 0.045, 0.20);
    P("r_elbow", 19, {0, -1, 0}, 0.045, 0.20);
    P("l_wrist", 20, {0, -1, 0}, 0.04, 0.05);
    P("r_wrist", 21, {0, -1, 0}, 0.04, 0.05);
    P("l_hand", 22, {0, -1, 0}, 0.04, 0.05);
    P("r_hand", 23, {0, -1, 0}, 0.04, 0.05);
    s.validate();
    return s;
}

std::string skeleton_to_json(const Skeleton& s) {
    json j;
    j["joints"] = json::array();
    for (const auto& joint : s.joints) {
        j["joints"].push_back({{"name", joint.name},
                               {"parent", joint.parent},
                               {"offset", {joint.rest_offset.x, joint.rest_offset.y, joint.rest_offset.z}}});
    }
    j["parts"] = json::array();
    for (const auto& p : s.parts) {
        j["parts"].push_back({{"name", p.name},
                              {"joint", p.joint},
                              {"axis", {p.axis.x, p.axis.y, p.axis.z}},
                              {"radius", p.radius},
                              {"length", p.length},
                              {"segments", p.segments},
                              {"rings", p.rings}});
    }
    return j.dump(2);
}

Skeleton skeleton_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("skeleton config parse error: ") + e.what());
    }
    Skeleton s;
    try {
        for (const auto& jj : j.at("joints")) {
            Joint joint;
            joint.name = jj.at("name").get<std::string>();
            joint.parent = jj.at("parent").get<int>();
            const auto& o = jj.at("offset");
            joint.rest_offset = {o.at(0).get<double>(), o.at(1).get<double>(), o.at(2).get<double>()};
            s.joints.push_back(joint);
        }
        for (const auto& jp : j.at("parts")) {
            BodyPart p;
            p.name = jp.at("name").get<std::string>();
            p.joint = jp.at("joint").get<int>();
            const auto& a = jp.at("axis");
            p.axis = {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
            p.radius = jp.at("radius").get<double>();
            p.length = jp.at("length").get<double>();
            p.segments = jp.value("segments", 12);
            p.rings = jp.value("rings", 4);
            s.parts.push_back(p);
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("skeleton config field error: ") + e.what());
    }
    s.validate();
    return s;
}

Skeleton load_skeleton(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open skeleton config: " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return skeleton_from_json(ss.str());
}

void save_skeleton(const Skeleton& s, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write skeleton config: " + path);
    os << skeleton_to_json(s) << "\n";
}

void export_obj(const BodyMesh& mesh, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("cannot write OBJ: " + path);
    os << "# capsule body mesh, " << mesh.vertices.size() << " vertices, " << mesh.faces.size()
       << " faces\n";
    char buf[160];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v.x, v.y, v.z);
        os << buf;
    }
    for (const auto& n : mesh.vertex_normals) {
        std::snprintf(buf, sizeof(buf), "vn %.9g %.9g %.9g\n", n.x, n.y, n.z);
        os << buf;
    }
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        os << "# part " << mesh.face_parts[f] << "\n";
        os << "f " << mesh.faces[f][0] + 1 << "//" << mesh.faces[f][0] + 1 << " "
           << mesh.faces[f][1] + 1 << "//" << mesh.faces[f][1] + 1 << " " << mesh.faces[f][2] + 1
           << "//" << mesh.faces[f][2] + 1 << "\n";
    }
}

}  // namespace cogen
