// render.hpp — CPU forward splatting (pinhole projection, EWA footprints,
// depth-sorted front-to-back alpha compositing) and the analytic backward
// pass for all world-space Gaussian parameters.
#pragma once

#include "texrig/gaussians.hpp"
#include "texrig/image.hpp"

#include <optional>

namespace texrig {

// Pinhole camera. world_to_camera maps x_cam = rotation * x_world +
// translation, camera looks down +z, image x right / y down. Pixel (px,py)
// covers [px,px+1]x[py,py+1] and is sampled at its center (px+0.5, py+0.5);
// cx,cy use the same convention.
struct Camera {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  int image_width = 0, image_height = 0;
  double near_plane = 0.01, far_plane = 100.0;
  Vec3 background = Vec3::Zero();

  void validate() const;
};

// Projected splat. cov2d includes the 0.3 px^2 low-pass added to both
// diagonal entries, so its eigenvalues are at least 0.3.
struct Splat2D {
  Vec2 mean2d;
  Mat2 cov2d;
  double depth = 0.0;
  Vec3 color = Vec3::Zero();
  double opacity = 0.0;
  int index = -1;
};

// Empty when the depth falls outside (near, far) or the 3-sigma footprint
// misses the image entirely. Throws NonPSD for a bad covariance.
std::optional<Splat2D> project(const Vec3& position, const Mat3& covariance, const Vec3& color,
                               double opacity, const Camera& camera);

struct RenderOutput {
  Image image;
  std::vector<double> alpha;  // per-pixel accumulated opacity, [0,1]
};

// Alpha ceiling and the per-pixel transmittance cutoff of the compositing
// loop (front-to-back, depth ascending, ties by Gaussian index).
inline constexpr double kAlphaClamp = 0.999;
inline constexpr double kTransmittanceCutoff = 1e-4;
inline constexpr double kCovLowPass = 0.3;  // px^2

RenderOutput render(const GlobalGaussianSet& set, const Camera& camera);

// Exact reverse-mode gradients of the compositing formula, including through
// cov2d^{-1} and the projection Jacobian's dependence on position. The alpha
// clamp contributes zero gradient where active. d_image holds dL/dpixel.
GaussianGrads render_backward(const GlobalGaussianSet& set, const Camera& camera,
                              const Image& d_image);

namespace testhooks {
// Flips the sign of the covariance pullback in render_backward. Exists only
// so the validation suite can prove the finite-difference harness catches a
// planted defect. Never enable outside tests.
extern bool flip_cov2d_pullback;
}  // namespace testhooks

}  // namespace texrig
