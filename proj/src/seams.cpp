#include "texrig/seams.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <ostream>

namespace texrig {

namespace {

LocalAttributeMaps probe_maps(int w, int h, const ValidityMask& mask, const Vec3& mu,
                              const Vec3& log_scale) {
  LocalAttributeMaps maps = LocalAttributeMaps::neutral(w, h, mask);
  for (size_t t = 0; t < maps.position_raw.texel_count(); ++t) {
    for (int c = 0; c < 3; ++c) {
      maps.position_raw.data[t * 3 + c] = mu[c];
      maps.log_scale_raw.data[t * 3 + c] = log_scale[c];
    }
  }
  return maps;
}

// Gaussian index per texel for a lift output (texels are emitted in row-major
// valid order).
std::vector<int64_t> texel_to_gaussian(const ValidityMask& mask) {
  std::vector<int64_t> map(static_cast<size_t>(mask.width) * mask.height, -1);
  int64_t g = 0;
  for (int j = 0; j < mask.height; ++j)
    for (int i = 0; i < mask.width; ++i)
      if (mask.valid(i, j)) map[static_cast<size_t>(j) * mask.width + i] = g++;
  return map;
}

}  // namespace

SeamReport compute_seam_report(const MeshPair& pair, int uv_width, int uv_height,
                               int dilation_rings) {
  const FaceIdMap face_map = rasterize_faces(pair.rest, uv_width, uv_height);
  const ValidityMask mask = face_map.coverage_mask();
  const std::vector<FaceFrame> frames = all_face_frames(pair, FrameVariant::FullJacobian);
  const JacobianField field =
      dilate_field(build_jacobian_field(frames, face_map), dilation_rings);

  std::vector<std::array<int, 4>> seam_pairs;  // i1, j1, i2, j2
  for (int j = 0; j < uv_height; ++j) {
    for (int i = 0; i < uv_width; ++i) {
      if (!mask.valid(i, j)) continue;
      const int32_t f = face_map.face_at(i, j);
      if (i + 1 < uv_width && mask.valid(i + 1, j) && face_map.face_at(i + 1, j) != f)
        seam_pairs.push_back({i, j, i + 1, j});
      if (j + 1 < uv_height && mask.valid(i, j + 1) && face_map.face_at(i, j + 1) != f)
        seam_pairs.push_back({i, j, i, j + 1});
    }
  }
  if (seam_pairs.empty())
    fail(ErrorKind::NoSeams, "no valid texel pair straddles a face boundary");

  const double probe = mean_edge_length(pair.rest);
  const int w = uv_width, h = uv_height;

  // Transport maps from position probes: columns of M are
  // (lift(probe * e_k) - lift(0)) / probe, per texel and per variant.
  std::vector<GlobalGaussianSet> naive_lifts, qp_lifts;
  for (int k = -1; k < 3; ++k) {
    Vec3 mu = Vec3::Zero();
    if (k >= 0) mu[k] = probe;
    const LocalAttributeMaps maps = probe_maps(w, h, mask, mu, Vec3::Zero());
    naive_lifts.push_back(lift_naive(maps, face_map, frames));
    qp_lifts.push_back(lift_quasi_phong(maps, field));
  }

  // Covariance probe: anisotropic so rotation differences stay visible.
  const Vec3 cov_log_scale(std::log(2.0 * probe), std::log(probe), std::log(0.5 * probe));
  const LocalAttributeMaps cov_maps = probe_maps(w, h, mask, Vec3::Zero(), cov_log_scale);
  const GlobalGaussianSet naive_cov = lift_naive(cov_maps, face_map, frames);
  const GlobalGaussianSet qp_cov = lift_quasi_phong(cov_maps, field);

  const std::vector<int64_t> t2g = texel_to_gaussian(mask);
  auto transport = [&](const std::vector<GlobalGaussianSet>& lifts, int64_t g) {
    Mat3 m;
    for (int k = 0; k < 3; ++k)
      m.col(k) = (lifts[k + 1].positions[g] - lifts[0].positions[g]) / probe;
    return m;
  };

  SeamReport report;
  report.probe_length = probe;
  for (const auto& [i1, j1, i2, j2] : seam_pairs) {
    const int64_t g1 = t2g[static_cast<size_t>(j1) * w + i1];
    const int64_t g2 = t2g[static_cast<size_t>(j2) * w + i2];
    SeamPairGap gap;
    gap.i1 = i1;
    gap.j1 = j1;
    gap.i2 = i2;
    gap.j2 = j2;
    gap.face1 = face_map.face_at(i1, j1);
    gap.face2 = face_map.face_at(i2, j2);

    const Mat3 dn = transport(naive_lifts, g1) - transport(naive_lifts, g2);
    const Mat3 dq = transport(qp_lifts, g1) - transport(qp_lifts, g2);
    gap.naive_pos_gap = dn.jacobiSvd().singularValues()[0] * probe;
    gap.quasi_phong_pos_gap = dq.jacobiSvd().singularValues()[0] * probe;
    gap.naive_cov_gap = (naive_cov.covariances[g1] - naive_cov.covariances[g2]).norm();
    gap.quasi_phong_cov_gap = (qp_cov.covariances[g1] - qp_cov.covariances[g2]).norm();
    report.pairs.push_back(gap);
  }

  const double inv = 1.0 / static_cast<double>(report.pairs.size());
  for (const SeamPairGap& g : report.pairs) {
    report.naive_pos_max = std::max(report.naive_pos_max, g.naive_pos_gap);
    report.qp_pos_max = std::max(report.qp_pos_max, g.quasi_phong_pos_gap);
    report.naive_cov_max = std::max(report.naive_cov_max, g.naive_cov_gap);
    report.qp_cov_max = std::max(report.qp_cov_max, g.quasi_phong_cov_gap);
    report.naive_pos_mean += g.naive_pos_gap * inv;
    report.qp_pos_mean += g.quasi_phong_pos_gap * inv;
    report.naive_cov_mean += g.naive_cov_gap * inv;
    report.qp_cov_mean += g.quasi_phong_cov_gap * inv;
  }
  return report;
}

void write_seam_csv(const SeamReport& report, std::ostream& out) {
  out << "i1,j1,i2,j2,face1,face2,naive_pos_gap,quasi_phong_pos_gap,naive_cov_gap,quasi_phong_cov_gap\n";
  char buf[256];
  for (const SeamPairGap& g : report.pairs) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%d,%d,%.9g,%.9g,%.9g,%.9g\n", g.i1, g.j1, g.i2,
                  g.j2, g.face1, g.face2, g.naive_pos_gap, g.quasi_phong_pos_gap, g.naive_cov_gap,
                  g.quasi_phong_cov_gap);
    out << buf;
  }
}

}  // namespace texrig
