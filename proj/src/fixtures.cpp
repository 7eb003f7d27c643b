#include "texrig/fixtures.hpp"

#include <cmath>

namespace texrig::fixtures {

TriMesh unit_quad() {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  m.uv_coords = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  m.uv_faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

TriMesh strip_flat() {
  TriMesh m;
  // hinge edge from (0,0,0) to (0,1,0); wings reach x = -1 and x = +1
  m.vertices = {{0, 0, 0}, {0, 1, 0}, {-1, 0.5, 0}, {1, 0.5, 0}};
  m.faces = {{0, 1, 2}, {0, 3, 1}};
  m.uv_coords = {{0.7, 0.05}, {0.7, 0.95}, {0.05, 0.5}, {0.95, 0.5}};
  m.uv_faces = {{0, 1, 2}, {0, 3, 1}};
  return m;
}

TriMesh strip_bent(double angle_rad) {
  TriMesh m = strip_flat();
  m.vertices[3] = rotation_y(angle_rad) * m.vertices[3];
  return m;
}

TriMesh sphere_islands(int bands, int segments) {
  TriMesh m;
  const double radius = 0.5;
  const double phi_lo = 0.2 * M_PI, phi_hi = 0.8 * M_PI;
  for (int b = 0; b <= bands; ++b) {
    const double phi = phi_lo + (phi_hi - phi_lo) * b / bands;
    for (int s = 0; s <= segments; ++s) {
      const double theta = 2.0 * M_PI * s / segments;
      m.vertices.emplace_back(radius * std::sin(phi) * std::cos(theta),
                              radius * std::cos(phi),
                              radius * std::sin(phi) * std::sin(theta));
    }
  }
  auto vid = [&](int b, int s) { return b * (segments + 1) + s; };
  for (int b = 0; b < bands; ++b) {
    for (int s = 0; s < segments; ++s) {
      m.faces.push_back({vid(b, s), vid(b + 1, s), vid(b + 1, s + 1)});
      m.faces.push_back({vid(b, s), vid(b + 1, s + 1), vid(b, s + 1)});
    }
  }

  // One UV island per face: a triangle inset into its own grid cell, so no
  // two faces are UV-adjacent and dilation never bridges them.
  const int nf = m.face_count();
  const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(nf))));
  const int rows = (nf + cols - 1) / cols;
  const double cw = 1.0 / cols, ch = 1.0 / rows;
  const double margin = 0.18;
  for (int f = 0; f < nf; ++f) {
    const int cx = f % cols, cy = f / cols;
    const double x0 = cx * cw + margin * cw, x1 = (cx + 1) * cw - margin * cw;
    const double y0 = cy * ch + margin * ch, y1 = (cy + 1) * ch - margin * ch;
    const int base = static_cast<int>(m.uv_coords.size());
    m.uv_coords.emplace_back(x0, y0);
    m.uv_coords.emplace_back(x1, y0);
    m.uv_coords.emplace_back(0.5 * (x0 + x1), y1);
    m.uv_faces.push_back({base, base + 1, base + 2});
  }
  return m;
}

TriMesh cube() {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  const int quads[6][4] = {{0, 3, 2, 1}, {4, 5, 6, 7}, {0, 1, 5, 4},
                           {2, 3, 7, 6}, {1, 2, 6, 5}, {3, 0, 4, 7}};
  // 0.25 x 1/3 atlas cell per quad, two triangles each
  int uv_base = 0;
  for (int q = 0; q < 6; ++q) {
    const double u0 = (q % 3) / 3.0 + 0.02, u1 = (q % 3 + 1) / 3.0 - 0.02;
    const double v0 = (q / 3) / 2.0 + 0.02, v1 = (q / 3 + 1) / 2.0 - 0.02;
    m.uv_coords.emplace_back(u0, v0);
    m.uv_coords.emplace_back(u1, v0);
    m.uv_coords.emplace_back(u1, v1);
    m.uv_coords.emplace_back(u0, v1);
    m.faces.push_back({quads[q][0], quads[q][1], quads[q][2]});
    m.uv_faces.push_back({uv_base, uv_base + 1, uv_base + 2});
    m.faces.push_back({quads[q][0], quads[q][2], quads[q][3]});
    m.uv_faces.push_back({uv_base, uv_base + 2, uv_base + 3});
    uv_base += 4;
  }
  return m;
}

TriMesh tetrahedron() {
  TriMesh m;
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0.5, 1, 0}, {0.5, 0.5, 1}};
  m.faces = {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {2, 0, 3}};
  for (int f = 0; f < 4; ++f) {
    const double u0 = (f % 2) * 0.5 + 0.03, v0 = (f / 2) * 0.5 + 0.03;
    const int base = static_cast<int>(m.uv_coords.size());
    m.uv_coords.emplace_back(u0, v0);
    m.uv_coords.emplace_back(u0 + 0.44, v0);
    m.uv_coords.emplace_back(u0 + 0.22, v0 + 0.44);
    m.uv_faces.push_back({base, base + 1, base + 2});
  }
  return m;
}

TriMesh transformed(const TriMesh& mesh, const Mat3& a, const Vec3& b) {
  TriMesh out = mesh;
  for (Vec3& v : out.vertices) v = a * v + b;
  return out;
}

Mat3 rotation_x(double rad) {
  Mat3 r;
  r << 1, 0, 0, 0, std::cos(rad), -std::sin(rad), 0, std::sin(rad), std::cos(rad);
  return r;
}

Mat3 rotation_y(double rad) {
  Mat3 r;
  r << std::cos(rad), 0, std::sin(rad), 0, 1, 0, -std::sin(rad), 0, std::cos(rad);
  return r;
}

Mat3 rotation_z(double rad) {
  Mat3 r;
  r << std::cos(rad), -std::sin(rad), 0, std::sin(rad), std::cos(rad), 0, 0, 0, 1;
  return r;
}

Mat3 random_well_conditioned(Rng& rng) {
  const Mat3 r1 = rotation_x(rng.uniform(0, 2 * M_PI)) * rotation_y(rng.uniform(0, 2 * M_PI)) *
                  rotation_z(rng.uniform(0, 2 * M_PI));
  const Mat3 r2 = rotation_x(rng.uniform(0, 2 * M_PI)) * rotation_y(rng.uniform(0, 2 * M_PI)) *
                  rotation_z(rng.uniform(0, 2 * M_PI));
  const Vec3 s(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0));
  return r1 * s.asDiagonal() * r2;
}

Camera look_at_camera(const Vec3& eye, const Vec3& at, double focal_px, int width, int height,
                      const Vec3& background) {
  const Vec3 forward = (at - eye).normalized();  // camera +z
  Vec3 up(0, 1, 0);
  if (std::abs(forward.dot(up)) > 0.99) up = Vec3(0, 0, 1);
  const Vec3 right = forward.cross(up).normalized();  // camera +x
  const Vec3 down = forward.cross(right).normalized();  // camera +y (image y down)
  Camera cam;
  cam.rotation.row(0) = right;
  cam.rotation.row(1) = down;
  cam.rotation.row(2) = forward;
  cam.translation = -(cam.rotation * eye);
  cam.fx = cam.fy = focal_px;
  cam.cx = width * 0.5;
  cam.cy = height * 0.5;
  cam.image_width = width;
  cam.image_height = height;
  cam.near_plane = 0.01;
  cam.far_plane = 100.0;
  cam.background = background;
  return cam;
}

GlobalGaussianSet random_gaussians(Rng& rng, int count, double extent, double mean_scale) {
  GlobalGaussianSet set;
  for (int g = 0; g < count; ++g) {
    set.positions.push_back(rng.uniform_vec3(-extent, extent));
    const Vec4 quat(rng.normal(), rng.normal(), rng.normal(), rng.normal());
    const Vec3 log_scale(std::log(mean_scale) + rng.uniform(-0.5, 0.5),
                         std::log(mean_scale) + rng.uniform(-0.5, 0.5),
                         std::log(mean_scale) + rng.uniform(-0.5, 0.5));
    set.covariances.push_back(assemble_local_covariance(quat, log_scale));
    set.colors.push_back(rng.uniform_vec3(0.05, 0.95));
    set.opacities.push_back(rng.uniform(0.2, 0.7));
    set.source_texels.emplace_back(-1, -1);
  }
  return set;
}

LocalAttributeMaps surface_maps(const TriMesh& rest, const FaceIdMap& face_map, Rng& rng,
                                double position_noise, double log_scale_center) {
  const int w = face_map.width, h = face_map.height;
  LocalAttributeMaps maps = LocalAttributeMaps::neutral(w, h, face_map.coverage_mask());
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const int32_t f = face_map.face_at(i, j);
      double* q = maps.rotation_raw.at(i, j);
      q[0] = 1.0 + 0.2 * rng.normal();
      q[1] = 0.2 * rng.normal();
      q[2] = 0.2 * rng.normal();
      q[3] = 0.2 * rng.normal();
      double* l = maps.log_scale_raw.at(i, j);
      for (int c = 0; c < 3; ++c) l[c] = log_scale_center + rng.uniform(-0.3, 0.3);
      maps.opacity_raw.at(i, j)[0] = rng.uniform(0.2, 1.2);  // sigmoid -> ~0.55..0.77
      double* col = maps.color_raw.at(i, j);
      for (int c = 0; c < 3; ++c) col[c] = rng.uniform(-1.5, 1.5);
      double* p = maps.position_raw.at(i, j);
      if (f >= 0) {
        // anchor on the surface: offset from the covering face's centroid
        const auto& bary = face_map.bary_at(i, j);
        const auto& fc = rest.faces[f];
        const Vec3 surf = bary[0] * rest.vertices[fc[0]] + bary[1] * rest.vertices[fc[1]] +
                          bary[2] * rest.vertices[fc[2]];
        const Vec3 off = surf - rest.face_centroid(f);
        for (int c = 0; c < 3; ++c) p[c] = off[c] + position_noise * rng.normal();
      } else {
        for (int c = 0; c < 3; ++c) p[c] = position_noise * rng.normal();
      }
    }
  }
  return maps;
}

}  // namespace texrig::fixtures
