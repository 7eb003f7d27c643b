#include "texrig/render.hpp"

#include <algorithm>
#include <cmath>

namespace texrig {

namespace testhooks {
bool flip_cov2d_pullback = false;
}

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) fail(ErrorKind::ConfigError, "camera focal lengths must be positive");
  if (!(near_plane > 0.0) || !(near_plane < far_plane))
    fail(ErrorKind::ConfigError, "camera requires 0 < near < far");
  if (image_width <= 0 || image_height <= 0)
    fail(ErrorKind::ConfigError, "camera image size must be positive");
  const Mat3 rrt = rotation * rotation.transpose();
  if ((rrt - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-8)
    fail(ErrorKind::ConfigError, "camera rotation is not orthonormal");
}

namespace {

struct ProjectedSplat {
  Vec2 mean2d;
  Mat2 cov2d;
  Mat2 lambda;  // cov2d^{-1}
  double depth;
  Vec3 color;
  double opacity;
  int index;                    // position in the input set
  int x_lo, x_hi, y_lo, y_hi;  // covered pixel indices
};

double sym_eig_max(const Mat2& m) {
  const double a = m(0, 0), c = m(1, 1), b = 0.5 * (m(0, 1) + m(1, 0));
  return 0.5 * (a + c) + std::sqrt(0.25 * (a - c) * (a - c) + b * b);
}

double sym_eig_min(const Mat2& m) {
  const double a = m(0, 0), c = m(1, 1), b = 0.5 * (m(0, 1) + m(1, 0));
  return 0.5 * (a + c) - std::sqrt(0.25 * (a - c) * (a - c) + b * b);
}

// 2x3 pinhole Jacobian at a camera-space point.
void projection_jacobian(const Camera& cam, const Vec3& t, Eigen::Matrix<double, 2, 3>& jp) {
  const double iz = 1.0 / t.z();
  const double iz2 = iz * iz;
  jp << cam.fx * iz, 0.0, -cam.fx * t.x() * iz2, 0.0, cam.fy * iz, -cam.fy * t.y() * iz2;
}

std::optional<ProjectedSplat> project_impl(const Vec3& position, const Mat3& covariance,
                                           const Vec3& color, double opacity, const Camera& cam,
                                           int index) {
  const Vec3 t = cam.rotation * position + cam.translation;
  if (!(t.z() > cam.near_plane && t.z() < cam.far_plane)) return std::nullopt;

  Eigen::Matrix<double, 2, 3> jp;
  projection_jacobian(cam, t, jp);
  const Mat3 v = cam.rotation * covariance * cam.rotation.transpose();
  const Mat2 raw = jp * v * jp.transpose();

  const double trace = std::max(raw.trace(), 0.0);
  if (sym_eig_min(raw) < -1e-9 * std::max(trace, 1e-300))
    fail(ErrorKind::NonPSD, "projected covariance of gaussian " + std::to_string(index) +
                                " is not positive semi-definite");

  ProjectedSplat sp;
  sp.cov2d = raw + kCovLowPass * Mat2::Identity();
  const double det = sp.cov2d.determinant();
  if (!(det > 0.0)) fail(ErrorKind::NonPSD, "degenerate footprint for gaussian " + std::to_string(index));
  sp.lambda << sp.cov2d(1, 1) / det, -sp.cov2d(0, 1) / det, -sp.cov2d(1, 0) / det,
      sp.cov2d(0, 0) / det;
  sp.mean2d = Vec2(cam.fx * t.x() / t.z() + cam.cx, cam.fy * t.y() / t.z() + cam.cy);
  sp.depth = t.z();
  sp.color = color;
  sp.opacity = opacity;
  sp.index = index;

  const double r = 3.0 * std::sqrt(sym_eig_max(sp.cov2d));
  sp.x_lo = std::max(static_cast<int>(std::ceil(sp.mean2d.x() - r - 0.5)), 0);
  sp.x_hi = std::min(static_cast<int>(std::floor(sp.mean2d.x() + r - 0.5)), cam.image_width - 1);
  sp.y_lo = std::max(static_cast<int>(std::ceil(sp.mean2d.y() - r - 0.5)), 0);
  sp.y_hi = std::min(static_cast<int>(std::floor(sp.mean2d.y() + r - 0.5)), cam.image_height - 1);
  if (sp.x_lo > sp.x_hi || sp.y_lo > sp.y_hi) return std::nullopt;
  return sp;
}

struct SplatScene {
  std::vector<ProjectedSplat> splats;          // depth-ascending, ties by index
  std::vector<std::vector<int32_t>> row_lists;  // slots per pixel row, depth order
};

SplatScene prepare_scene(const GlobalGaussianSet& set, const Camera& cam) {
  cam.validate();
  const int64_t n = static_cast<int64_t>(set.size());
  std::vector<std::optional<ProjectedSplat>> projected(n);
  std::vector<uint8_t> nonpsd(n, 0);
#pragma omp parallel for schedule(static)
  for (int64_t g = 0; g < n; ++g) {
    try {
      projected[g] =
          project_impl(set.positions[g], set.covariances[g], set.colors[g], set.opacities[g], cam,
                       static_cast<int>(g));
    } catch (const Error&) {
      nonpsd[g] = 1;
    }
  }
  for (int64_t g = 0; g < n; ++g) {
    if (nonpsd[g])  // re-raise for the lowest index, independent of schedule
      project_impl(set.positions[g], set.covariances[g], set.colors[g], set.opacities[g], cam,
                   static_cast<int>(g));
  }

  SplatScene scene;
  scene.splats.reserve(n);
  for (int64_t g = 0; g < n; ++g)
    if (projected[g]) scene.splats.push_back(*projected[g]);
  std::sort(scene.splats.begin(), scene.splats.end(),
            [](const ProjectedSplat& a, const ProjectedSplat& b) {
              if (a.depth != b.depth) return a.depth < b.depth;
              return a.index < b.index;
            });

  scene.row_lists.resize(cam.image_height);
  for (size_t s = 0; s < scene.splats.size(); ++s)
    for (int y = scene.splats[s].y_lo; y <= scene.splats[s].y_hi; ++y)
      scene.row_lists[y].push_back(static_cast<int32_t>(s));
  return scene;
}

inline double splat_alpha(const ProjectedSplat& sp, double px, double py) {
  const double dx = px - sp.mean2d.x();
  const double dy = py - sp.mean2d.y();
  const double q = sp.lambda(0, 0) * dx * dx + (sp.lambda(0, 1) + sp.lambda(1, 0)) * dx * dy +
                   sp.lambda(1, 1) * dy * dy;
  return std::min(kAlphaClamp, sp.opacity * std::exp(-0.5 * q));
}

}  // namespace

std::optional<Splat2D> project(const Vec3& position, const Mat3& covariance, const Vec3& color,
                               double opacity, const Camera& camera) {
  camera.validate();
  const auto sp = project_impl(position, covariance, color, opacity, camera, 0);
  if (!sp) return std::nullopt;
  Splat2D out;
  out.mean2d = sp->mean2d;
  out.cov2d = sp->cov2d;
  out.depth = sp->depth;
  out.color = sp->color;
  out.opacity = sp->opacity;
  out.index = sp->index;
  return out;
}

RenderOutput render(const GlobalGaussianSet& set, const Camera& camera) {
  const SplatScene scene = prepare_scene(set, camera);
  const int w = camera.image_width, h = camera.image_height;
  RenderOutput out;
  out.image = Image::zeros(w, h);
  out.alpha.assign(static_cast<size_t>(w) * h, 0.0);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const auto& row = scene.row_lists[y];
    const double py = y + 0.5;
    for (int x = 0; x < w; ++x) {
      const double px = x + 0.5;
      double transmittance = 1.0;
      Vec3 acc = Vec3::Zero();
      for (int32_t s : row) {
        if (transmittance < kTransmittanceCutoff) break;
        const ProjectedSplat& sp = scene.splats[s];
        if (x < sp.x_lo || x > sp.x_hi) continue;
        const double a = splat_alpha(sp, px, py);
        acc += sp.color * (a * transmittance);
        transmittance *= 1.0 - a;
      }
      acc += transmittance * camera.background;
      out.image.set_pixel(x, y, acc);
      out.alpha[static_cast<size_t>(y) * w + x] = 1.0 - transmittance;
    }
  }
  return out;
}

namespace {

// Per-splat accumulators in image space; chained to 3D once rows are merged.
struct SplatGrad2D {
  Vec3 d_color = Vec3::Zero();
  double d_opacity = 0.0;
  Vec2 d_mean2d = Vec2::Zero();
  Mat2 d_cov2d = Mat2::Zero();
};

struct PixelContrib {
  int32_t slot;  // position in the row list
  double alpha;
  double transmittance;  // at entry
};

}  // namespace

GaussianGrads render_backward(const GlobalGaussianSet& set, const Camera& camera,
                              const Image& d_image) {
  const SplatScene scene = prepare_scene(set, camera);
  const int w = camera.image_width, h = camera.image_height;
  if (d_image.width != w || d_image.height != h)
    fail(ErrorKind::ShapeMismatch, "d_image resolution differs from camera");

  // Per-row partial gradients, merged in row order afterwards so the result
  // is independent of the parallel schedule.
  std::vector<std::vector<SplatGrad2D>> row_grads(h);

#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    const auto& row = scene.row_lists[y];
    if (row.empty()) continue;
    auto& grads = row_grads[y];
    grads.assign(row.size(), SplatGrad2D{});
    std::vector<PixelContrib> contribs;
    contribs.reserve(64);
    const double py = y + 0.5;

    for (int x = 0; x < w; ++x) {
      const double px = x + 0.5;
      contribs.clear();
      double transmittance = 1.0;
      for (size_t k = 0; k < row.size(); ++k) {
        if (transmittance < kTransmittanceCutoff) break;
        const ProjectedSplat& sp = scene.splats[row[k]];
        if (x < sp.x_lo || x > sp.x_hi) continue;
        const double a = splat_alpha(sp, px, py);
        contribs.push_back({static_cast<int32_t>(k), a, transmittance});
        transmittance *= 1.0 - a;
      }
      if (contribs.empty()) continue;

      const Vec3 gp = d_image.pixel(x, y);
      // Color composited behind the current splat, background included.
      Vec3 suffix = transmittance * camera.background;
      for (size_t c = contribs.size(); c-- > 0;) {
        const PixelContrib& pc = contribs[c];
        const ProjectedSplat& sp = scene.splats[row[pc.slot]];
        SplatGrad2D& sg = grads[pc.slot];

        sg.d_color += gp * (pc.alpha * pc.transmittance);

        const double d_alpha =
            gp.dot(sp.color * pc.transmittance - suffix / (1.0 - pc.alpha));
        // The clamp zeroes the gradient of everything upstream of alpha.
        const double dx = px - sp.mean2d.x();
        const double dy = py - sp.mean2d.y();
        const double q = sp.lambda(0, 0) * dx * dx +
                         (sp.lambda(0, 1) + sp.lambda(1, 0)) * dx * dy +
                         sp.lambda(1, 1) * dy * dy;
        const double gauss = std::exp(-0.5 * q);
        if (sp.opacity * gauss < kAlphaClamp) {
          sg.d_opacity += d_alpha * gauss;
          const double common = d_alpha * sp.opacity * gauss;
          const Vec2 ld = sp.lambda * Vec2(dx, dy);
          sg.d_mean2d += common * ld;
          sg.d_cov2d += (0.5 * common) * (ld * ld.transpose());
        }
        suffix += sp.color * (pc.alpha * pc.transmittance);
      }
    }
  }

  // Deterministic merge: rows ascending, entries in row-list order.
  std::vector<SplatGrad2D> merged(scene.splats.size());
  for (int y = 0; y < h; ++y) {
    if (row_grads[y].empty()) continue;
    const auto& row = scene.row_lists[y];
    for (size_t k = 0; k < row.size(); ++k) {
      SplatGrad2D& dst = merged[row[k]];
      const SplatGrad2D& src = row_grads[y][k];
      dst.d_color += src.d_color;
      dst.d_opacity += src.d_opacity;
      dst.d_mean2d += src.d_mean2d;
      dst.d_cov2d += src.d_cov2d;
    }
  }

  GaussianGrads out = GaussianGrads::zeros(set.size());
  const int64_t ns = static_cast<int64_t>(scene.splats.size());
#pragma omp parallel for schedule(static)
  for (int64_t s = 0; s < ns; ++s) {
    const ProjectedSplat& sp = scene.splats[s];
    const SplatGrad2D& sg = merged[s];
    const int g = sp.index;

    out.d_color[g] = sg.d_color;
    out.d_opacity[g] = sg.d_opacity;

    const Vec3 t = camera.rotation * set.positions[g] + camera.translation;
    Eigen::Matrix<double, 2, 3> jp;
    projection_jacobian(camera, t, jp);

    Mat2 a2 = 0.5 * (sg.d_cov2d + sg.d_cov2d.transpose());
    // dL/dSigma through cov2d = Jp V Jp^T, V = R Sigma R^T (Jp held fixed)
    Mat2 a2_sigma = testhooks::flip_cov2d_pullback ? Mat2(-a2) : a2;
    out.d_covariance[g] =
        camera.rotation.transpose() * jp.transpose() * a2_sigma * jp * camera.rotation;

    // position: pinhole mean path plus the projection Jacobian's own
    // dependence on the camera-space point
    Vec3 d_t = jp.transpose() * sg.d_mean2d;

    const Mat3 v = camera.rotation * set.covariances[g] * camera.rotation.transpose();
    const Eigen::Matrix<double, 2, 3> d_jp = 2.0 * a2 * jp * v;
    const double iz = 1.0 / t.z();
    const double iz2 = iz * iz;
    const double iz3 = iz2 * iz;
    d_t.x() += d_jp(0, 2) * (-camera.fx * iz2);
    d_t.y() += d_jp(1, 2) * (-camera.fy * iz2);
    d_t.z() += d_jp(0, 0) * (-camera.fx * iz2) + d_jp(1, 1) * (-camera.fy * iz2) +
               d_jp(0, 2) * (2.0 * camera.fx * t.x() * iz3) +
               d_jp(1, 2) * (2.0 * camera.fy * t.y() * iz3);

    out.d_position[g] = camera.rotation.transpose() * d_t;
  }
  return out;
}

}  // namespace texrig
