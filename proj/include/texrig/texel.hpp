// texel.hpp — UV texel grids, per-face rasterization into texel space, the
// validity mask, seam-safe dilation, and center-convention bilinear sampling.
#pragma once

#include "texrig/mesh.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace texrig {

// A texel is Valid when a UV face covers its center, Padded when dilation
// filled it from valid neighbors, Invalid otherwise. Padded texels contribute
// to sampling but never emit Gaussians.
enum class TexelState : uint8_t { Invalid = 0, Valid = 1, Padded = 2 };

struct ValidityMask {
  int width = 0, height = 0;
  std::vector<TexelState> states;

  static ValidityMask filled(int w, int h, TexelState s);

  TexelState at(int i, int j) const { return states[static_cast<size_t>(j) * width + i]; }
  TexelState& at(int i, int j) { return states[static_cast<size_t>(j) * width + i]; }
  bool valid(int i, int j) const { return at(i, j) == TexelState::Valid; }
  bool usable(int i, int j) const { return at(i, j) != TexelState::Invalid; }
  size_t count_valid() const;
};

// Row-major grid of fixed-arity texels. Texel (i,j) has its center at
// u=(i+0.5)/width, v=(j+0.5)/height. Values are held in double; the binary
// container downcasts to float32 on write.
struct TexelGrid {
  int width = 0, height = 0, arity = 0;
  std::vector<double> data;

  static TexelGrid zeros(int w, int h, int arity);

  double* at(int i, int j) { return data.data() + (static_cast<size_t>(j) * width + i) * arity; }
  const double* at(int i, int j) const {
    return data.data() + (static_cast<size_t>(j) * width + i) * arity;
  }
  size_t texel_count() const { return static_cast<size_t>(width) * height; }
  bool all_finite() const;
};

inline Vec2 texel_center(int i, int j, int width, int height) {
  return {(i + 0.5) / width, (j + 0.5) / height};
}

// Covering UV face per texel center (-1 where uncovered) plus barycentric
// coordinates within that face. Overlaps resolve to the lowest face index.
struct FaceIdMap {
  int width = 0, height = 0;
  std::vector<int32_t> face;
  std::vector<std::array<double, 3>> bary;

  int32_t face_at(int i, int j) const { return face[static_cast<size_t>(j) * width + i]; }
  const std::array<double, 3>& bary_at(int i, int j) const {
    return bary[static_cast<size_t>(j) * width + i];
  }
  ValidityMask coverage_mask() const;
};

// Piecewise-constant per-texel copy of the covering face's frame.
struct JacobianField {
  TexelGrid jacobians;     // arity 9, row-major 3x3
  TexelGrid translations;  // arity 3
  ValidityMask mask;

  int width() const { return mask.width; }
  int height() const { return mask.height; }
};

// Point-in-triangle at every texel center, inclusive edges, lowest face index
// winning overlaps. Faces with (near-)zero UV area never cover.
FaceIdMap rasterize_faces(const TriMesh& mesh, int width, int height);

JacobianField build_jacobian_field(const std::vector<FaceFrame>& frames, const FaceIdMap& face_map);

// Each ring pass fills invalid texels having at least one usable 8-neighbor
// with the componentwise average of those neighbors, marking them Padded.
// Coverage (Valid) is never altered.
JacobianField dilate_field(const JacobianField& field, int rings);

// The <=4 texels bracketing (u,v) under the center convention, after
// clamp-to-edge and after dropping unusable texels. If every raw weight of
// the kept taps is zero they share weight uniformly (renormalization limit).
struct BilinearTaps {
  struct Tap {
    int i, j;
    double weight;  // raw, divide by weight_sum
  };
  Tap taps[4];
  int count = 0;
  double weight_sum = 0.0;
};

BilinearTaps bilinear_taps(const ValidityMask& mask, double u, double v);

// Mask-aware bilinear sample; false when every bracketing texel is invalid
// and unpadded. `out` must hold grid.arity values.
bool try_sample_bilinear(const TexelGrid& grid, const ValidityMask& mask, double u, double v,
                         double* out) noexcept;

// Throwing wrapper (AllNeighborsInvalid).
std::vector<double> sample_bilinear(const TexelGrid& grid, const ValidityMask& mask, double u,
                                    double v);

struct ResampledGrid {
  TexelGrid grid;
  ValidityMask mask;  // input states, demoted to Invalid where sampling failed
};

// Same-resolution resample at the corner lattice (i/(W-1), j/(H-1)). The
// sampling lattice is corner-aligned while values live at centers, so outputs
// blend up to 4 neighboring inputs; this is the smoothing that turns the
// piecewise-constant field into a continuous one.
ResampledGrid corner_lattice_resample(const TexelGrid& grid, const ValidityMask& mask);

}  // namespace texrig
