#include "texrig/mesh.hpp"

#include <cstdio>

namespace texrig {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::TopologyMismatch: return "TopologyMismatch";
    case ErrorKind::DegenerateFace: return "DegenerateFace";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::AllNeighborsInvalid: return "AllNeighborsInvalid";
    case ErrorKind::ZeroQuaternion: return "ZeroQuaternion";
    case ErrorKind::NonPSD: return "NonPSD";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::ImageTooSmall: return "ImageTooSmall";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingUV: return "MissingUV";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::NoSeams: return "NoSeams";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

double TriMesh::face_area(int f) const {
  const auto& fc = faces[f];
  const Vec3 e1 = vertices[fc[1]] - vertices[fc[0]];
  const Vec3 e2 = vertices[fc[2]] - vertices[fc[0]];
  return 0.5 * e1.cross(e2).norm();
}

Vec3 TriMesh::face_centroid(int f) const {
  const auto& fc = faces[f];
  return (vertices[fc[0]] + vertices[fc[1]] + vertices[fc[2]]) / 3.0;
}

Vec3 TriMesh::face_unit_normal(int f) const {
  const auto& fc = faces[f];
  const Vec3 e1 = vertices[fc[1]] - vertices[fc[0]];
  const Vec3 e2 = vertices[fc[2]] - vertices[fc[0]];
  return e1.cross(e2).normalized();
}

void TriMesh::validate() const {
  if (faces.size() != uv_faces.size())
    fail(ErrorKind::TopologyMismatch,
         "faces and uv_faces differ in length (" + std::to_string(faces.size()) + " vs " +
             std::to_string(uv_faces.size()) + ")");
  const int nv = vertex_count();
  const int nuv = static_cast<int>(uv_coords.size());
  for (size_t f = 0; f < faces.size(); ++f) {
    for (int k = 0; k < 3; ++k) {
      if (faces[f][k] < 0 || faces[f][k] >= nv)
        fail(ErrorKind::IndexOutOfRange, "vertex index out of range in face " + std::to_string(f));
      if (uv_faces[f][k] < 0 || uv_faces[f][k] >= nuv)
        fail(ErrorKind::IndexOutOfRange, "uv index out of range in face " + std::to_string(f));
    }
  }
  for (size_t i = 0; i < uv_coords.size(); ++i) {
    const Vec2& uv = uv_coords[i];
    if (!(uv.x() >= 0.0 && uv.x() <= 1.0 && uv.y() >= 0.0 && uv.y() <= 1.0))
      fail(ErrorKind::ParseError, "uv coordinate " + std::to_string(i) + " outside [0,1]^2");
  }
  for (int f = 0; f < face_count(); ++f) {
    if (!(face_area(f) > kDegenerateAreaTol))
      fail(ErrorKind::DegenerateFace, "face " + std::to_string(f) + " has zero area");
  }
}

double mean_edge_length(const TriMesh& mesh) {
  double sum = 0.0;
  size_t count = 0;
  for (const auto& fc : mesh.faces) {
    for (int k = 0; k < 3; ++k) {
      sum += (mesh.vertices[fc[(k + 1) % 3]] - mesh.vertices[fc[k]]).norm();
      ++count;
    }
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

MeshPair load_pair(TriMesh rest, TriMesh deformed) {
  rest.validate();
  deformed.validate();
  if (rest.vertex_count() != deformed.vertex_count())
    fail(ErrorKind::TopologyMismatch,
         "vertex counts differ: " + std::to_string(rest.vertex_count()) + " vs " +
             std::to_string(deformed.vertex_count()));
  if (rest.face_count() != deformed.face_count())
    fail(ErrorKind::TopologyMismatch,
         "face counts differ: " + std::to_string(rest.face_count()) + " vs " +
             std::to_string(deformed.face_count()));
  if (rest.faces != deformed.faces || rest.uv_faces != deformed.uv_faces)
    fail(ErrorKind::TopologyMismatch, "face index arrays differ between rest and deformed");
  if (rest.uv_coords.size() != deformed.uv_coords.size())
    fail(ErrorKind::TopologyMismatch, "uv coordinate counts differ");
  for (size_t i = 0; i < rest.uv_coords.size(); ++i) {
    if (rest.uv_coords[i] != deformed.uv_coords[i])
      fail(ErrorKind::TopologyMismatch, "uv coordinates differ at index " + std::to_string(i));
  }
  return MeshPair{std::move(rest), std::move(deformed)};
}

namespace {

void check_face_nondegenerate(const TriMesh& mesh, int f, const char* which) {
  if (!(mesh.face_area(f) > kDegenerateAreaTol))
    fail(ErrorKind::DegenerateFace,
         std::string("degenerate ") + which + " face " + std::to_string(f));
}

// Orthonormal (tangent, normal, binormal) columns built from the first edge
// and the face normal.
Mat3 face_orthonormal_frame(const Vec3& e1, const Vec3& n) {
  const Vec3 t = e1.normalized();
  const Vec3 b = n.cross(t);
  Mat3 frame;
  frame.col(0) = t;
  frame.col(1) = n;
  frame.col(2) = b;
  return frame;
}

}  // namespace

FaceFrame face_frame(const MeshPair& pair, int face_index, FrameVariant variant,
                     NormalScaling normal_scaling) {
  if (face_index < 0 || face_index >= pair.rest.face_count())
    fail(ErrorKind::IndexOutOfRange, "face index " + std::to_string(face_index));
  check_face_nondegenerate(pair.rest, face_index, "rest");
  check_face_nondegenerate(pair.deformed, face_index, "deformed");

  const auto& fc = pair.rest.faces[face_index];
  const Vec3 r0 = pair.rest.vertices[fc[0]];
  const Vec3 re1 = pair.rest.vertices[fc[1]] - r0;
  const Vec3 re2 = pair.rest.vertices[fc[2]] - r0;
  const Vec3 d0 = pair.deformed.vertices[fc[0]];
  const Vec3 de1 = pair.deformed.vertices[fc[1]] - d0;
  const Vec3 de2 = pair.deformed.vertices[fc[2]] - d0;

  const Vec3 rn = re1.cross(re2);
  const Vec3 dn = de1.cross(de2);

  FaceFrame out;
  out.variant = variant;
  out.translation = pair.deformed.face_centroid(face_index);

  if (variant == FrameVariant::FullJacobian) {
    // J = D * R^-1 with R = [e1 | e2 | n] from the rest face and D likewise
    // from the deformed face. The third column's scaling is the convention
    // switch; with unit normals the normal direction carries no stretch.
    Mat3 rest_m, def_m;
    rest_m.col(0) = re1;
    rest_m.col(1) = re2;
    def_m.col(0) = de1;
    def_m.col(1) = de2;
    if (normal_scaling == NormalScaling::Unit) {
      rest_m.col(2) = rn.normalized();
      def_m.col(2) = dn.normalized();
    } else {
      rest_m.col(2) = rn;
      def_m.col(2) = dn;
    }
    out.jacobian = def_m * rest_m.inverse();
    const double det = out.jacobian.determinant();
    if (!std::isfinite(det) || det == 0.0)
      fail(ErrorKind::DegenerateFace,
           "singular jacobian for face " + std::to_string(face_index));
  } else {
    const double s = std::sqrt(dn.norm() / rn.norm());  // sqrt of area ratio
    const Mat3 rest_frame = face_orthonormal_frame(re1, rn.normalized());
    const Mat3 def_frame = face_orthonormal_frame(de1, dn.normalized());
    out.jacobian = s * (def_frame * rest_frame.transpose());
  }
  return out;
}

std::vector<FaceFrame> all_face_frames(const MeshPair& pair, FrameVariant variant,
                                       NormalScaling normal_scaling) {
  const int nf = pair.rest.face_count();
  std::vector<FaceFrame> frames(nf);
  // Failures are collected and re-raised for the lowest face index so the
  // reported face does not depend on the parallel schedule.
  std::vector<int> bad(nf, 0);
#pragma omp parallel for schedule(static)
  for (int f = 0; f < nf; ++f) {
    try {
      frames[f] = face_frame(pair, f, variant, normal_scaling);
    } catch (const Error&) {
      bad[f] = 1;
    }
  }
  for (int f = 0; f < nf; ++f) {
    if (bad[f]) face_frame(pair, f, variant, normal_scaling);  // re-throws with face index
  }
  return frames;
}

}  // namespace texrig
