#include "texrig/texel.hpp"

#include <algorithm>
#include <cmath>

namespace texrig {

ValidityMask ValidityMask::filled(int w, int h, TexelState s) {
  ValidityMask m;
  m.width = w;
  m.height = h;
  m.states.assign(static_cast<size_t>(w) * h, s);
  return m;
}

size_t ValidityMask::count_valid() const {
  return static_cast<size_t>(std::count(states.begin(), states.end(), TexelState::Valid));
}

TexelGrid TexelGrid::zeros(int w, int h, int arity) {
  TexelGrid g;
  g.width = w;
  g.height = h;
  g.arity = arity;
  g.data.assign(static_cast<size_t>(w) * h * arity, 0.0);
  return g;
}

bool TexelGrid::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

ValidityMask FaceIdMap::coverage_mask() const {
  ValidityMask m = ValidityMask::filled(width, height, TexelState::Invalid);
  for (size_t t = 0; t < face.size(); ++t)
    if (face[t] >= 0) m.states[t] = TexelState::Valid;
  return m;
}

namespace {

// Inclusive-edge tolerance for barycentric point-in-triangle tests; well
// inside the FaceIdMap invariant band of +-1e-6.
constexpr double kBaryEps = 1e-9;

// UV-degenerate faces cannot produce barycentrics and never cover texels.
constexpr double kUvAreaEps = 1e-16;

// Bounding-box prefilters must never reject a point the inclusive barycentric
// test would accept, so they expand by a margin comfortably above kBaryEps
// scaled to UV units.
constexpr double kCoverMargin = 1e-6;

struct UvTri {
  Vec2 a, b, c;
  double denom;  // signed doubled area
};

inline double cross2(const Vec2& p, const Vec2& q) { return p.x() * q.y() - p.y() * q.x(); }

inline bool barycentrics(const UvTri& tri, const Vec2& p, std::array<double, 3>& out) {
  const double b1 = cross2(p - tri.a, tri.c - tri.a) / tri.denom;
  const double b2 = cross2(tri.b - tri.a, p - tri.a) / tri.denom;
  const double b0 = 1.0 - b1 - b2;
  if (b0 < -kBaryEps || b1 < -kBaryEps || b2 < -kBaryEps) return false;
  out = {b0, b1, b2};
  return true;
}

}  // namespace

FaceIdMap rasterize_faces(const TriMesh& mesh, int width, int height) {
  if (width < 2 || height < 2)
    fail(ErrorKind::ShapeMismatch, "texel grid must be at least 2x2");

  FaceIdMap map;
  map.width = width;
  map.height = height;
  map.face.assign(static_cast<size_t>(width) * height, -1);
  map.bary.assign(static_cast<size_t>(width) * height, {0.0, 0.0, 0.0});

  const int nf = mesh.face_count();
  std::vector<UvTri> tris(nf);
  // Per-row candidate lists, ascending face index by construction, so the
  // first barycentric hit per texel is the lowest covering face.
  std::vector<std::vector<int32_t>> row_faces(height);
  for (int f = 0; f < nf; ++f) {
    const auto& uf = mesh.uv_faces[f];
    UvTri tri{mesh.uv_coords[uf[0]], mesh.uv_coords[uf[1]], mesh.uv_coords[uf[2]], 0.0};
    tri.denom = cross2(tri.b - tri.a, tri.c - tri.a);
    tris[f] = tri;
    if (std::abs(tri.denom) <= kUvAreaEps) continue;
    const double v_lo = std::min({tri.a.y(), tri.b.y(), tri.c.y()}) - kCoverMargin;
    const double v_hi = std::max({tri.a.y(), tri.b.y(), tri.c.y()}) + kCoverMargin;
    // texel rows whose centers fall inside [v_lo, v_hi]
    int j_lo = static_cast<int>(std::ceil(v_lo * height - 0.5));
    int j_hi = static_cast<int>(std::floor(v_hi * height - 0.5));
    j_lo = std::max(j_lo, 0);
    j_hi = std::min(j_hi, height - 1);
    for (int j = j_lo; j <= j_hi; ++j) row_faces[j].push_back(f);
  }

#pragma omp parallel for schedule(static)
  for (int j = 0; j < height; ++j) {
    const auto& cands = row_faces[j];
    if (cands.empty()) continue;
    for (int i = 0; i < width; ++i) {
      const Vec2 p = texel_center(i, j, width, height);
      for (int32_t f : cands) {
        const UvTri& tri = tris[f];
        const double u_lo = std::min({tri.a.x(), tri.b.x(), tri.c.x()});
        const double u_hi = std::max({tri.a.x(), tri.b.x(), tri.c.x()});
        if (p.x() < u_lo - kCoverMargin || p.x() > u_hi + kCoverMargin) continue;
        std::array<double, 3> b;
        if (barycentrics(tri, p, b)) {
          const size_t t = static_cast<size_t>(j) * width + i;
          map.face[t] = f;
          map.bary[t] = b;
          break;
        }
      }
    }
  }
  return map;
}

JacobianField build_jacobian_field(const std::vector<FaceFrame>& frames,
                                   const FaceIdMap& face_map) {
  const int w = face_map.width, h = face_map.height;
  JacobianField field;
  field.jacobians = TexelGrid::zeros(w, h, 9);
  field.translations = TexelGrid::zeros(w, h, 3);
  field.mask = face_map.coverage_mask();

  const int32_t nf = static_cast<int32_t>(frames.size());
  for (int32_t f : face_map.face) {
    if (f >= nf)
      fail(ErrorKind::IndexOutOfRange,
           "face map references face " + std::to_string(f) + " but only " + std::to_string(nf) +
               " frames given");
  }

#pragma omp parallel for schedule(static)
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const int32_t f = face_map.face_at(i, j);
      if (f < 0) continue;
      const FaceFrame& fr = frames[f];
      double* jm = field.jacobians.at(i, j);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) jm[r * 3 + c] = fr.jacobian(r, c);
      double* tr = field.translations.at(i, j);
      for (int k = 0; k < 3; ++k) tr[k] = fr.translation[k];
    }
  }
  return field;
}

JacobianField dilate_field(const JacobianField& field, int rings) {
  JacobianField out = field;
  const int w = out.width(), h = out.height();
  for (int ring = 0; ring < rings; ++ring) {
    const ValidityMask prev_mask = out.mask;
    const TexelGrid prev_jac = out.jacobians;
    const TexelGrid prev_tr = out.translations;
#pragma omp parallel for schedule(static)
    for (int j = 0; j < h; ++j) {
      for (int i = 0; i < w; ++i) {
        if (prev_mask.usable(i, j)) continue;
        double jac_sum[9] = {0};
        double tr_sum[3] = {0};
        int n = 0;
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            if (di == 0 && dj == 0) continue;
            const int ni = i + di, nj = j + dj;
            if (ni < 0 || ni >= w || nj < 0 || nj >= h) continue;
            if (!prev_mask.usable(ni, nj)) continue;
            const double* jm = prev_jac.at(ni, nj);
            const double* tm = prev_tr.at(ni, nj);
            for (int k = 0; k < 9; ++k) jac_sum[k] += jm[k];
            for (int k = 0; k < 3; ++k) tr_sum[k] += tm[k];
            ++n;
          }
        }
        if (n == 0) continue;
        double* jm = out.jacobians.at(i, j);
        double* tm = out.translations.at(i, j);
        for (int k = 0; k < 9; ++k) jm[k] = jac_sum[k] / n;
        for (int k = 0; k < 3; ++k) tm[k] = tr_sum[k] / n;
        out.mask.at(i, j) = TexelState::Padded;
      }
    }
  }
  return out;
}

BilinearTaps bilinear_taps(const ValidityMask& mask, double u, double v) {
  const int w = mask.width, h = mask.height;
  u = std::clamp(u, 0.0, 1.0);
  v = std::clamp(v, 0.0, 1.0);
  // continuous texel coordinates; center of texel i sits at x = i
  const double x = u * w - 0.5;
  const double y = v * h - 0.5;
  const double x0f = std::floor(x), y0f = std::floor(y);
  const double wx = x - x0f, wy = y - y0f;
  const int x0 = std::clamp(static_cast<int>(x0f), 0, w - 1);
  const int x1 = std::clamp(static_cast<int>(x0f) + 1, 0, w - 1);
  const int y0 = std::clamp(static_cast<int>(y0f), 0, h - 1);
  const int y1 = std::clamp(static_cast<int>(y0f) + 1, 0, h - 1);

  const int ti[4] = {x0, x1, x0, x1};
  const int tj[4] = {y0, y0, y1, y1};
  const double tw[4] = {(1.0 - wx) * (1.0 - wy), wx * (1.0 - wy), (1.0 - wx) * wy, wx * wy};

  BilinearTaps taps;
  for (int k = 0; k < 4; ++k) {
    if (!mask.usable(ti[k], tj[k])) continue;
    taps.taps[taps.count++] = {ti[k], tj[k], tw[k]};
    taps.weight_sum += tw[k];
  }
  if (taps.count > 0 && taps.weight_sum <= 0.0) {
    for (int k = 0; k < taps.count; ++k) taps.taps[k].weight = 1.0;
    taps.weight_sum = taps.count;
  }
  return taps;
}

bool try_sample_bilinear(const TexelGrid& grid, const ValidityMask& mask, double u, double v,
                         double* out) noexcept {
  const BilinearTaps taps = bilinear_taps(mask, u, v);
  if (taps.count == 0) return false;
  const int arity = grid.arity;
  for (int c = 0; c < arity; ++c) out[c] = 0.0;
  for (int k = 0; k < taps.count; ++k) {
    const double* texel = grid.at(taps.taps[k].i, taps.taps[k].j);
    const double wgt = taps.taps[k].weight;
    for (int c = 0; c < arity; ++c) out[c] += wgt * texel[c];
  }
  const double inv = 1.0 / taps.weight_sum;
  for (int c = 0; c < arity; ++c) out[c] *= inv;
  return true;
}

std::vector<double> sample_bilinear(const TexelGrid& grid, const ValidityMask& mask, double u,
                                    double v) {
  std::vector<double> out(grid.arity, 0.0);
  if (!try_sample_bilinear(grid, mask, u, v, out.data()))
    fail(ErrorKind::AllNeighborsInvalid,
         "all texels bracketing (" + std::to_string(u) + ", " + std::to_string(v) +
             ") are invalid and unpadded");
  return out;
}

ResampledGrid corner_lattice_resample(const TexelGrid& grid, const ValidityMask& mask) {
  const int w = grid.width, h = grid.height;
  if (w < 2 || h < 2) fail(ErrorKind::ShapeMismatch, "resample requires at least 2x2");
  ResampledGrid out;
  out.grid = TexelGrid::zeros(w, h, grid.arity);
  out.mask = mask;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < h; ++j) {
    const double v = static_cast<double>(j) / (h - 1);
    for (int i = 0; i < w; ++i) {
      const double u = static_cast<double>(i) / (w - 1);
      if (!try_sample_bilinear(grid, mask, u, v, out.grid.at(i, j)))
        out.mask.at(i, j) = TexelState::Invalid;
    }
  }
  return out;
}

}  // namespace texrig
