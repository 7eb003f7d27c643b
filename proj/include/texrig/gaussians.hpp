// gaussians.hpp — local texel-space Gaussian attributes, activations, PSD
// covariance assembly, and lifting to world space (per-face or through the
// blended Jacobian field), with the matching gradient pullbacks.
#pragma once

#include "texrig/texel.hpp"

#include <optional>
#include <utility>

namespace texrig {

// Raw (pre-activation) per-texel Gaussian parameters. The five grids share
// one resolution and one validity mask. Geometry channels total 11
// (position 3 + quaternion 4 + log-scale 3 + opacity 1), plus 3 color.
struct LocalAttributeMaps {
  TexelGrid position_raw;   // arity 3, mesh units, identity activation
  TexelGrid rotation_raw;   // arity 4, (w,x,y,z), normalized on use
  TexelGrid log_scale_raw;  // arity 3, exp-activated
  TexelGrid opacity_raw;    // arity 1, sigmoid-activated
  TexelGrid color_raw;      // arity 3, sigmoid-activated
  ValidityMask mask;

  static constexpr int kGeometryChannels = 3 + 4 + 3 + 1;

  // Zero raws with identity quaternions.
  static LocalAttributeMaps neutral(int w, int h, ValidityMask mask);

  int width() const { return mask.width; }
  int height() const { return mask.height; }
  void validate_shapes() const;  // ShapeMismatch on any grid disagreeing with the mask
};

// Rotation from an unnormalized quaternion; ZeroQuaternion below 1e-8 norm.
Mat3 rotation_from_quaternion(const Vec4& q_raw);

// Sigma_local = R S S^T R^T with S = diag(exp(log_scale)). Symmetric PSD by
// construction.
Mat3 assemble_local_covariance(const Vec4& rotation_raw, const Vec3& log_scale_raw);

struct GlobalGaussianSet {
  std::vector<Vec3> positions;
  std::vector<Mat3> covariances;  // symmetric PSD, m^2
  std::vector<Vec3> colors;       // [0,1]
  std::vector<double> opacities;  // [0,1]
  std::vector<std::pair<int, int>> source_texels;  // (i, j)

  size_t size() const { return positions.size(); }
};

// One Gaussian per valid texel, transformed by that texel's covering face:
// mu = J mu_local + T, Sigma = J Sigma_local J^T. Colors and opacities pass
// through their activations untouched by geometry.
GlobalGaussianSet lift_naive(const LocalAttributeMaps& local, const FaceIdMap& face_map,
                             const std::vector<FaceFrame>& frames);

struct QuasiPhongForward {
  GlobalGaussianSet set;
  // Per-texel affine candidates before blending, defined on usable texels.
  TexelGrid position_field;    // arity 3
  TexelGrid covariance_field;  // arity 9
};

// Per usable texel compute J mu_local + T and J Sigma_local J^T, resample both
// grids at the corner lattice, then read valid texels out as Gaussians.
// Covariances are symmetrized after blending to scrub roundoff. Throws
// AllNeighborsInvalid (with texel index) if a valid texel's resample finds no
// usable tap; more dilation rings fix that.
QuasiPhongForward lift_quasi_phong_forward(const LocalAttributeMaps& local,
                                           const JacobianField& field);

inline GlobalGaussianSet lift_quasi_phong(const LocalAttributeMaps& local,
                                          const JacobianField& field) {
  return lift_quasi_phong_forward(local, field).set;
}

// dL/d(world Gaussian parameters), aligned with a GlobalGaussianSet.
struct GaussianGrads {
  std::vector<Vec3> d_position;
  std::vector<Mat3> d_covariance;
  std::vector<Vec3> d_color;
  std::vector<double> d_opacity;

  static GaussianGrads zeros(size_t n);
  size_t size() const { return d_position.size(); }
};

// dL/d(raw maps), same shapes as LocalAttributeMaps.
struct LocalMapGrads {
  TexelGrid position;   // arity 3
  TexelGrid rotation;   // arity 4
  TexelGrid log_scale;  // arity 3
  TexelGrid opacity;    // arity 1
  TexelGrid color;      // arity 3

  static LocalMapGrads zeros(int w, int h);
  void add_scaled(const LocalMapGrads& other, double scale);
};

LocalMapGrads lift_naive_backward(const LocalAttributeMaps& local, const FaceIdMap& face_map,
                                  const std::vector<FaceFrame>& frames,
                                  const GaussianGrads& grads);

LocalMapGrads lift_quasi_phong_backward(const LocalAttributeMaps& local,
                                        const JacobianField& field, const GaussianGrads& grads);

// Splatting point-cloud export: binary little-endian PLY with the de-facto
// layout (position, zero normals, zeroth-order SH color, opacity logit, log
// scales and quaternion recovered by eigendecomposition of Sigma).
void export_gaussians(const GlobalGaussianSet& set, const std::string& path);
GlobalGaussianSet import_gaussians(const std::string& path);

inline constexpr double kSh0 = 0.28209479177387814;

}  // namespace texrig
