#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cogen/geometry.hpp"

namespace cogen {

// Toy articulated body: a kinematic chain of joints, each part a rigid
// capsule attached to one joint. It provides exactly what the motion codec
// needs from a body model: posed surface normals and per-vertex part labels.

struct Joint {
    int parent = -1;       // -1 for the root; otherwise strictly less than own index
    Vec3 rest_offset;      // meters, in parent frame
    std::string name;
};

struct BodyPart {
    int joint = 0;         // owning joint
    Vec3 axis{1, 0, 0};    // capsule direction in the joint's local frame
    double radius = 0.05;  // meters
    double length = 0.2;   // cylindrical section length; 0 degenerates to a sphere-ish cap pair
    int segments = 12;     // radial tessellation
    int rings = 4;         // latitudinal tessellation per hemisphere
    std::string name;
};

struct Skeleton {
    std::vector<Joint> joints;
    std::vector<BodyPart> parts;

    int joint_count() const { return static_cast<int>(joints.size()); }
    int part_count() const { return static_cast<int>(parts.size()); }

    // Throws ShapeError if topology or part invariants are violated.
    void validate() const;
};

struct PoseVector {
    std::vector<Vec3> rotations;  // axis-angle per joint
    Vec3 root_translation;

    // All components finite, axis-angle magnitudes canonical (< pi + eps).
    void validate(int expected_joints) const;
};

using JointTransforms = std::vector<Rigid>;

struct BodyMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<std::int64_t, 3>> faces;
    std::vector<Vec3> vertex_normals;
    std::vector<int> vertex_parts;
    std::vector<int> face_parts;
    int flagged_normals = 0;  // vertices whose accumulated normal vanished
};

// World transform per joint: parent chain composed with the local rest
// offset and rotation; the root additionally applies root_translation.
JointTransforms forward_kinematics(const Skeleton& skeleton, const PoseVector& pose);

// Tessellates each part's capsule in its joint frame, rigidly transforms to
// world, assigns part labels, and computes area-weighted vertex normals.
BodyMesh skin_mesh(const Skeleton& skeleton, const JointTransforms& transforms);

// Area-weighted incident-face normals, renormalized. Vertices whose
// accumulated normal vanishes get +z and are counted in the return value.
int compute_vertex_normals(const std::vector<Vec3>& vertices,
                           const std::vector<std::array<std::int64_t, 3>>& faces,
                           std::vector<Vec3>& out_normals);

// Canonical 8-joint / 8-part toy skeleton and the 24-joint SMPL-cardinality
// variant.
Skeleton toy_skeleton8();
Skeleton toy_skeleton24();

PoseVector rest_pose(const Skeleton& skeleton);

// JSON schema: {"joints":[{"name","parent","offset":[x,y,z]}...],
//               "parts":[{"name","joint","axis":[..],"radius","length","segments","rings"}...]}
Skeleton load_skeleton(const std::string& path);
void save_skeleton(const Skeleton& s, const std::string& path);
std::string skeleton_to_json(const Skeleton& s);
Skeleton skeleton_from_json(const std::string& text);

// ASCII OBJ with one "# part <idx>" comment per face.
void export_obj(const BodyMesh& mesh, const std::string& path);

}  // namespace cogen
