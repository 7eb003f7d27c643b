// fixtures.hpp — procedurally generated meshes, cameras and scenes used by
// the test suites, the validation command and the benchmark.
#pragma once

#include "texrig/fit.hpp"

namespace texrig::fixtures {

// Two triangles tiling [0,1]^2 at z=0, UVs covering the full unit square,
// split along the diagonal (shared UV atlas, one interior seam).
TriMesh unit_quad();

// Two-triangle hinge strip. The shared edge runs along y at x=0; bending
// rotates the +x wing about that hinge. The UV hinge sits at u=0.7, off the
// grid center so the corner-lattice resample strictly mixes both faces at
// the seam.
TriMesh strip_flat();
TriMesh strip_bent(double angle_rad);

// Spherical band (poles omitted so every face is well conditioned) with one
// isolated UV island per face. bands*segments*2 faces; islands are packed in
// a grid with >=3-texel separation at the resolutions the tests use.
TriMesh sphere_islands(int bands, int segments);

TriMesh cube();
TriMesh tetrahedron();

// Applies x -> A x + b to every vertex.
TriMesh transformed(const TriMesh& mesh, const Mat3& a, const Vec3& b);

// Random invertible matrix with singular values in [0.5, 2].
Mat3 random_well_conditioned(Rng& rng);
Mat3 rotation_x(double rad);
Mat3 rotation_y(double rad);
Mat3 rotation_z(double rad);

// Camera at `eye` looking at `at` (world +y up), +z forward / y down image
// convention, principal point centered.
Camera look_at_camera(const Vec3& eye, const Vec3& at, double focal_px, int width, int height,
                      const Vec3& background = Vec3::Zero());

// Random renderable scene: Gaussians with anisotropic covariances built from
// random quaternions/log-scales, colors and opacities in safe ranges.
GlobalGaussianSet random_gaussians(Rng& rng, int count, double extent, double mean_scale);

// Smooth random attribute maps over the quad/strip fixtures: positions spread
// on the surface (canonical offsets from face centroids) plus noise, scales
// around `log_scale_center`, moderate opacities, random colors.
LocalAttributeMaps surface_maps(const TriMesh& rest, const FaceIdMap& face_map, Rng& rng,
                                double position_noise, double log_scale_center);

}  // namespace texrig::fixtures
