#include "texrig/gaussians.hpp"

namespace texrig {

LocalAttributeMaps LocalAttributeMaps::neutral(int w, int h, ValidityMask mask) {
  LocalAttributeMaps maps;
  maps.position_raw = TexelGrid::zeros(w, h, 3);
  maps.rotation_raw = TexelGrid::zeros(w, h, 4);
  maps.log_scale_raw = TexelGrid::zeros(w, h, 3);
  maps.opacity_raw = TexelGrid::zeros(w, h, 1);
  maps.color_raw = TexelGrid::zeros(w, h, 3);
  maps.mask = std::move(mask);
  for (size_t t = 0; t < maps.rotation_raw.texel_count(); ++t)
    maps.rotation_raw.data[t * 4] = 1.0;  // identity quaternion (w,x,y,z)
  return maps;
}

void LocalAttributeMaps::validate_shapes() const {
  auto check = [&](const TexelGrid& g, int arity, const char* name) {
    if (g.width != mask.width || g.height != mask.height || g.arity != arity)
      fail(ErrorKind::ShapeMismatch, std::string("attribute map '") + name + "' has wrong shape");
  };
  check(position_raw, 3, "position");
  check(rotation_raw, 4, "rotation");
  check(log_scale_raw, 3, "log_scale");
  check(opacity_raw, 1, "opacity");
  check(color_raw, 3, "color");
  static_assert(kGeometryChannels == 11);
}

Mat3 rotation_from_quaternion(const Vec4& q_raw) {
  const double n = q_raw.norm();
  if (!(n > 1e-8)) fail(ErrorKind::ZeroQuaternion, "quaternion norm below 1e-8");
  const double w = q_raw[0] / n, x = q_raw[1] / n, y = q_raw[2] / n, z = q_raw[3] / n;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Mat3 assemble_local_covariance(const Vec4& rotation_raw, const Vec3& log_scale_raw) {
  const Mat3 r = rotation_from_quaternion(rotation_raw);
  const Vec3 s2 = (2.0 * log_scale_raw).array().exp();
  return r * s2.asDiagonal() * r.transpose();
}

namespace {

struct ActivatedTexel {
  Vec3 mu;
  Mat3 sigma;
};

ActivatedTexel activate_geometry(const LocalAttributeMaps& local, int i, int j) {
  const double* p = local.position_raw.at(i, j);
  const double* q = local.rotation_raw.at(i, j);
  const double* l = local.log_scale_raw.at(i, j);
  ActivatedTexel out;
  out.mu = Vec3(p[0], p[1], p[2]);
  try {
    out.sigma = assemble_local_covariance(Vec4(q[0], q[1], q[2], q[3]), Vec3(l[0], l[1], l[2]));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ZeroQuaternion)
      fail(ErrorKind::ZeroQuaternion,
           "zero quaternion at texel (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    throw;
  }
  return out;
}

std::vector<std::pair<int, int>> valid_texels(const ValidityMask& mask) {
  std::vector<std::pair<int, int>> out;
  out.reserve(mask.count_valid());
  for (int j = 0; j < mask.height; ++j)
    for (int i = 0; i < mask.width; ++i)
      if (mask.valid(i, j)) out.emplace_back(i, j);
  return out;
}

}  // namespace

GlobalGaussianSet lift_naive(const LocalAttributeMaps& local, const FaceIdMap& face_map,
                             const std::vector<FaceFrame>& frames) {
  local.validate_shapes();
  if (face_map.width != local.width() || face_map.height != local.height())
    fail(ErrorKind::ShapeMismatch, "face map resolution differs from attribute maps");

  const auto texels = valid_texels(local.mask);
  const int64_t n = static_cast<int64_t>(texels.size());
  GlobalGaussianSet set;
  set.positions.resize(n);
  set.covariances.resize(n);
  set.colors.resize(n);
  set.opacities.resize(n);
  set.source_texels = texels;

#pragma omp parallel for schedule(static)
  for (int64_t g = 0; g < n; ++g) {
    const auto [i, j] = texels[g];
    const int32_t f = face_map.face_at(i, j);
    const FaceFrame& fr = frames[f];
    const ActivatedTexel a = activate_geometry(local, i, j);
    set.positions[g] = fr.jacobian * a.mu + fr.translation;
    set.covariances[g] = fr.jacobian * a.sigma * fr.jacobian.transpose();
    const double* c = local.color_raw.at(i, j);
    set.colors[g] = Vec3(sigmoid(c[0]), sigmoid(c[1]), sigmoid(c[2]));
    set.opacities[g] = sigmoid(local.opacity_raw.at(i, j)[0]);
  }
  return set;
}

QuasiPhongForward lift_quasi_phong_forward(const LocalAttributeMaps& local,
                                           const JacobianField& field) {
  local.validate_shapes();
  const int w = local.width(), h = local.height();
  if (field.width() != w || field.height() != h)
    fail(ErrorKind::ShapeMismatch, "jacobian field resolution differs from attribute maps");

  QuasiPhongForward fwd;
  fwd.position_field = TexelGrid::zeros(w, h, 3);
  fwd.covariance_field = TexelGrid::zeros(w, h, 9);

  // Per-texel affine candidates P = J mu + T and C = J Sigma J^T on every
  // usable (valid or padded) texel of the field.
#pragma omp parallel for schedule(static)
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      if (!field.mask.usable(i, j)) continue;
      const ActivatedTexel a = activate_geometry(local, i, j);
      const double* jm = field.jacobians.at(i, j);
      Mat3 jac;
      jac << jm[0], jm[1], jm[2], jm[3], jm[4], jm[5], jm[6], jm[7], jm[8];
      const double* tm = field.translations.at(i, j);
      const Vec3 p = jac * a.mu + Vec3(tm[0], tm[1], tm[2]);
      const Mat3 c = jac * a.sigma * jac.transpose();
      double* pf = fwd.position_field.at(i, j);
      for (int k = 0; k < 3; ++k) pf[k] = p[k];
      double* cf = fwd.covariance_field.at(i, j);
      for (int r = 0; r < 3; ++r)
        for (int cidx = 0; cidx < 3; ++cidx) cf[r * 3 + cidx] = c(r, cidx);
    }
  }

  const ResampledGrid blended_p = corner_lattice_resample(fwd.position_field, field.mask);
  const ResampledGrid blended_c = corner_lattice_resample(fwd.covariance_field, field.mask);

  const auto texels = valid_texels(local.mask);
  const int64_t n = static_cast<int64_t>(texels.size());
  GlobalGaussianSet& set = fwd.set;
  set.positions.resize(n);
  set.covariances.resize(n);
  set.colors.resize(n);
  set.opacities.resize(n);
  set.source_texels = texels;

  for (int64_t g = 0; g < n; ++g) {
    const auto [i, j] = texels[g];
    if (!blended_p.mask.usable(i, j))
      fail(ErrorKind::AllNeighborsInvalid,
           "resample found no usable tap at valid texel (" + std::to_string(i) + ", " +
               std::to_string(j) + "); increase dilation rings");
    const double* p = blended_p.grid.at(i, j);
    set.positions[g] = Vec3(p[0], p[1], p[2]);
    const double* c = blended_c.grid.at(i, j);
    Mat3 cov;
    cov << c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7], c[8];
    set.covariances[g] = 0.5 * (cov + cov.transpose());
    const double* col = local.color_raw.at(i, j);
    set.colors[g] = Vec3(sigmoid(col[0]), sigmoid(col[1]), sigmoid(col[2]));
    set.opacities[g] = sigmoid(local.opacity_raw.at(i, j)[0]);
  }
  return fwd;
}

GaussianGrads GaussianGrads::zeros(size_t n) {
  GaussianGrads g;
  g.d_position.assign(n, Vec3::Zero());
  g.d_covariance.assign(n, Mat3::Zero());
  g.d_color.assign(n, Vec3::Zero());
  g.d_opacity.assign(n, 0.0);
  return g;
}

LocalMapGrads LocalMapGrads::zeros(int w, int h) {
  LocalMapGrads g;
  g.position = TexelGrid::zeros(w, h, 3);
  g.rotation = TexelGrid::zeros(w, h, 4);
  g.log_scale = TexelGrid::zeros(w, h, 3);
  g.opacity = TexelGrid::zeros(w, h, 1);
  g.color = TexelGrid::zeros(w, h, 3);
  return g;
}

void LocalMapGrads::add_scaled(const LocalMapGrads& other, double scale) {
  auto axpy = [scale](TexelGrid& dst, const TexelGrid& src) {
    for (size_t k = 0; k < dst.data.size(); ++k) dst.data[k] += scale * src.data[k];
  };
  axpy(position, other.position);
  axpy(rotation, other.rotation);
  axpy(log_scale, other.log_scale);
  axpy(opacity, other.opacity);
  axpy(color, other.color);
}

namespace {

// d(R S S^T R^T)/d(raw quaternion, raw log scale) pulled back against a
// symmetric upstream gradient G = dL/dSigma_local.
void covariance_pullback(const Vec4& q_raw, const Vec3& log_scale, const Mat3& g_sigma,
                         Vec4& d_quat, Vec3& d_log_scale) {
  const double n = q_raw.norm();
  const Vec4 q = q_raw / n;
  const double w = q[0], x = q[1], y = q[2], z = q[3];

  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);

  const Vec3 s2 = (2.0 * log_scale).array().exp();

  // dL/dM for M = diag(s^2): Sigma = R M R^T
  const Mat3 g_m = r.transpose() * g_sigma * r;
  for (int k = 0; k < 3; ++k) d_log_scale[k] = g_m(k, k) * 2.0 * s2[k];

  // dL/dR = 2 G R M for symmetric G
  const Mat3 g_r = 2.0 * g_sigma * r * s2.asDiagonal();

  Mat3 dr_dw, dr_dx, dr_dy, dr_dz;
  dr_dw << 0, -z, y, z, 0, -x, -y, x, 0;
  dr_dx << 0, y, z, y, -2 * x, -w, z, w, -2 * x;
  dr_dy << -2 * y, x, w, x, 0, z, -w, z, -2 * y;
  dr_dz << -2 * z, -w, x, w, -2 * z, y, x, y, 0;
  Vec4 d_unit;
  d_unit[0] = 2.0 * (g_r.array() * dr_dw.array()).sum();
  d_unit[1] = 2.0 * (g_r.array() * dr_dx.array()).sum();
  d_unit[2] = 2.0 * (g_r.array() * dr_dy.array()).sum();
  d_unit[3] = 2.0 * (g_r.array() * dr_dz.array()).sum();

  // through the normalization q = q_raw / |q_raw|
  d_quat = (d_unit - q * q.dot(d_unit)) / n;
}

void scatter_texel_grads(const LocalAttributeMaps& local, int i, int j, const Vec3& d_p,
                         const Mat3& d_c, LocalMapGrads& out, const Mat3& jac) {
  // position: P = J mu + T
  const Vec3 d_mu = jac.transpose() * d_p;
  double* gp = out.position.at(i, j);
  for (int k = 0; k < 3; ++k) gp[k] += d_mu[k];

  // covariance: C = J Sigma J^T; upstream symmetrized so the quaternion
  // pullback's symmetric-G form applies
  const Mat3 d_c_sym = 0.5 * (d_c + d_c.transpose());
  const Mat3 g_sigma = jac.transpose() * d_c_sym * jac;
  const double* q = local.rotation_raw.at(i, j);
  const double* l = local.log_scale_raw.at(i, j);
  Vec4 d_quat;
  Vec3 d_ls;
  covariance_pullback(Vec4(q[0], q[1], q[2], q[3]), Vec3(l[0], l[1], l[2]), g_sigma, d_quat, d_ls);
  double* gq = out.rotation.at(i, j);
  for (int k = 0; k < 4; ++k) gq[k] += d_quat[k];
  double* gl = out.log_scale.at(i, j);
  for (int k = 0; k < 3; ++k) gl[k] += d_ls[k];
}

void scatter_appearance_grads(const LocalAttributeMaps& local, int i, int j, const Vec3& d_color,
                              double d_opacity, LocalMapGrads& out) {
  const double* c = local.color_raw.at(i, j);
  double* gc = out.color.at(i, j);
  for (int k = 0; k < 3; ++k) {
    const double a = sigmoid(c[k]);
    gc[k] += d_color[k] * a * (1.0 - a);
  }
  const double o = sigmoid(local.opacity_raw.at(i, j)[0]);
  out.opacity.at(i, j)[0] += d_opacity * o * (1.0 - o);
}

Mat3 field_jacobian_at(const JacobianField& field, int i, int j) {
  const double* jm = field.jacobians.at(i, j);
  Mat3 jac;
  jac << jm[0], jm[1], jm[2], jm[3], jm[4], jm[5], jm[6], jm[7], jm[8];
  return jac;
}

}  // namespace

LocalMapGrads lift_naive_backward(const LocalAttributeMaps& local, const FaceIdMap& face_map,
                                  const std::vector<FaceFrame>& frames,
                                  const GaussianGrads& grads) {
  LocalMapGrads out = LocalMapGrads::zeros(local.width(), local.height());
  const auto texels = valid_texels(local.mask);
  for (size_t g = 0; g < texels.size(); ++g) {
    const auto [i, j] = texels[g];
    const FaceFrame& fr = frames[face_map.face_at(i, j)];
    scatter_texel_grads(local, i, j, grads.d_position[g], grads.d_covariance[g], out, fr.jacobian);
    scatter_appearance_grads(local, i, j, grads.d_color[g], grads.d_opacity[g], out);
  }
  return out;
}

LocalMapGrads lift_quasi_phong_backward(const LocalAttributeMaps& local,
                                        const JacobianField& field, const GaussianGrads& grads) {
  const int w = local.width(), h = local.height();
  LocalMapGrads out = LocalMapGrads::zeros(w, h);

  // dL/d(pre-blend candidate grids), gathered through the resample taps.
  TexelGrid d_p_field = TexelGrid::zeros(w, h, 3);
  TexelGrid d_c_field = TexelGrid::zeros(w, h, 9);

  const auto texels = valid_texels(local.mask);
  for (size_t g = 0; g < texels.size(); ++g) {
    const auto [i, j] = texels[g];
    const double u = static_cast<double>(i) / (w - 1);
    const double v = static_cast<double>(j) / (h - 1);
    const BilinearTaps taps = bilinear_taps(field.mask, u, v);
    // upstream covariance gradient symmetrized to match the forward's scrub
    const Mat3 d_cov = 0.5 * (grads.d_covariance[g] + grads.d_covariance[g].transpose());
    for (int k = 0; k < taps.count; ++k) {
      const double wgt = taps.taps[k].weight / taps.weight_sum;
      double* dp = d_p_field.at(taps.taps[k].i, taps.taps[k].j);
      for (int c = 0; c < 3; ++c) dp[c] += wgt * grads.d_position[g][c];
      double* dc = d_c_field.at(taps.taps[k].i, taps.taps[k].j);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) dc[r * 3 + c] += wgt * d_cov(r, c);
    }
    scatter_appearance_grads(local, i, j, grads.d_color[g], grads.d_opacity[g], out);
  }

#pragma omp parallel for schedule(static)
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      if (!field.mask.usable(i, j)) continue;
      const double* dp = d_p_field.at(i, j);
      const double* dc = d_c_field.at(i, j);
      Vec3 d_p(dp[0], dp[1], dp[2]);
      Mat3 d_c;
      d_c << dc[0], dc[1], dc[2], dc[3], dc[4], dc[5], dc[6], dc[7], dc[8];
      if (d_p.isZero() && d_c.isZero()) continue;
      scatter_texel_grads(local, i, j, d_p, d_c, out, field_jacobian_at(field, i, j));
    }
  }
  return out;
}

}  // namespace texrig
