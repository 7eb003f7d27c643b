// seams.hpp — quantifies deformation continuity across UV face boundaries for
// the per-face (naive) and blended (quasi-phong) lifts.
#pragma once

#include "texrig/fit.hpp"

#include <iosfwd>

namespace texrig {

// One 4-adjacent valid texel pair straddling a face boundary. Gaps measure
// how differently the two texels' Gaussians transport the same local probe:
// the position gap is sigma_max(M1 - M2) * probe_length over the pair's
// local->global linear maps M (worst case over probe offsets of one mean rest
// edge length); the covariance gap is the Frobenius distance of the lifted
// anisotropic probe covariance probe_length^2 * diag(4, 1, 1/4). Both are
// exactly zero when the two transports agree (flat strips, affine motion).
struct SeamPairGap {
  int i1, j1, i2, j2;
  int face1, face2;
  double naive_pos_gap = 0.0;
  double quasi_phong_pos_gap = 0.0;
  double naive_cov_gap = 0.0;
  double quasi_phong_cov_gap = 0.0;
};

struct SeamReport {
  std::vector<SeamPairGap> pairs;
  double probe_length = 0.0;
  double naive_pos_max = 0.0, naive_pos_mean = 0.0;
  double qp_pos_max = 0.0, qp_pos_mean = 0.0;
  double naive_cov_max = 0.0, naive_cov_mean = 0.0;
  double qp_cov_max = 0.0, qp_cov_mean = 0.0;
};

// Throws NoSeams when no valid texel pair straddles a face boundary. The
// transport maps are recovered from the public lifts by probing with
// mu_local = 0 and mu_local = probe_length * e_k.
SeamReport compute_seam_report(const MeshPair& pair, int uv_width, int uv_height,
                               int dilation_rings);

void write_seam_csv(const SeamReport& report, std::ostream& out);

}  // namespace texrig
