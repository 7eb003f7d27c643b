// mesh.hpp — indexed triangle mesh with a separate UV topology, and per-face
// deformation frames computed from a rest/deformed mesh pair.
#pragma once

#include "texrig/core.hpp"

#include <array>
#include <vector>

namespace texrig {

// Triangle mesh with per-corner UV indices. `faces` and `uv_faces` are
// parallel arrays: corner k of face f has position vertices[faces[f][k]] and
// UV uv_coords[uv_faces[f][k]]. UVs live in [0,1]^2.
struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> faces;
  std::vector<Vec2> uv_coords;
  std::vector<std::array<int, 3>> uv_faces;

  int face_count() const { return static_cast<int>(faces.size()); }
  int vertex_count() const { return static_cast<int>(vertices.size()); }

  double face_area(int f) const;
  Vec3 face_centroid(int f) const;
  Vec3 face_unit_normal(int f) const;

  // Index ranges, UV bounds, parallel face arrays, and the degenerate-face
  // area tolerance. Throws on the first violation.
  void validate() const;
};

double mean_edge_length(const TriMesh& mesh);

// Rest/deformed pose pair. UV layout and connectivity are shared; only 3D
// vertex positions may differ.
struct MeshPair {
  TriMesh rest;
  TriMesh deformed;
};

// Validates both meshes and cross-checks topology (vertex/face counts,
// identical face and UV index arrays, identical UV coordinates).
MeshPair load_pair(TriMesh rest, TriMesh deformed);

enum class FrameVariant { FullJacobian, ScaledRotation };

// Third-column convention for the full Jacobian's edge matrices. Unit keeps
// the singular value along the normal at 1; AreaScaled scales the normal
// column by the triangle's area on each side instead.
enum class NormalScaling { Unit, AreaScaled };

// Per-face affine frame: global = jacobian * local + translation.
// FullJacobian maps rest edge vectors to deformed edge vectors exactly;
// ScaledRotation is s*R with isotropic s = sqrt(deformed/rest area ratio).
// translation is always the deformed centroid.
struct FaceFrame {
  Mat3 jacobian = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  FrameVariant variant = FrameVariant::FullJacobian;
};

FaceFrame face_frame(const MeshPair& pair, int face_index, FrameVariant variant,
                     NormalScaling normal_scaling = NormalScaling::Unit);

// One frame per face, in face order; deterministic regardless of thread count.
std::vector<FaceFrame> all_face_frames(const MeshPair& pair, FrameVariant variant,
                                       NormalScaling normal_scaling = NormalScaling::Unit);

}  // namespace texrig
