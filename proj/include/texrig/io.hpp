// io.hpp — OBJ ingestion, run configuration, camera files, and the TXF1
// binary texel container.
#pragma once

#include "texrig/fit.hpp"

#include <string>
#include <vector>

namespace texrig {

// Wavefront OBJ with texture coordinates: v, vt, and f with v/vt or v/vt/vn
// corners. N-gon faces triangulate as fans. Faces without vt are rejected
// (MissingUV); malformed lines raise ParseError with the line number.
TriMesh parse_obj(const std::string& path);
TriMesh parse_obj_text(const std::string& text, const std::string& origin = "<memory>");

// Flat key=value run configuration. Unknown keys are rejected; serialization
// followed by parsing reproduces the config exactly.
struct RunConfig {
  int uv_width = 512;
  int uv_height = 512;
  int dilation_rings = 2;
  std::string variant = "quasi_phong";  // naive | quasi_phong
  uint64_t seed = 0;

  double lambda_l1 = 0.8;
  double lambda_ssim = 0.2;
  double lambda_reg_mu = 0.0;
  double lambda_reg_s = 0.0;
  double eps_mu = 1.0;  // multiples of the rest mesh's mean edge length
  double eps_s = 0.6;

  int iterations = 2000;
  double lr_position = 1.6e-4;
  double lr_rotation = 1e-3;
  double lr_log_scale = 1e-3;
  double lr_opacity = 5e-2;
  double lr_color = 2.5e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-15;

  int image_width = 64;
  int image_height = 64;
  bool write_float_dumps = false;

  std::string rest_obj;
  std::vector<std::string> deformed_objs;
  std::string cameras;
  std::vector<std::string> targets;
  std::string maps;  // optional input attribute maps
  std::string output_dir = ".";

  bool operator==(const RunConfig&) const = default;

  LiftVariant lift_variant() const;
};

RunConfig parse_config_text(const std::string& text, const std::string& origin = "<memory>");
RunConfig parse_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

// Camera file: one camera per line, '#' comments. 21 numbers:
// fx fy cx cy r00 r01 r02 r10 r11 r12 r20 r21 r22 tx ty tz near far bg_r bg_g bg_b
// Image dimensions come from the config.
std::vector<Camera> load_cameras(const std::string& path, int image_width, int image_height);

// TXF1 container: little-endian header {magic "TXF1", u32 width, u32 height,
// u32 arity}, then width*height mask bytes (0 invalid, 1 valid, 2 padded),
// then float32 data row-major. Grids hold double in memory; writes downcast.
void save_texel_grid(const TexelGrid& grid, const ValidityMask& mask, const std::string& path);
struct LoadedGrid {
  TexelGrid grid;
  ValidityMask mask;
};
LoadedGrid load_texel_grid(const std::string& path);

// Jacobian fields serialize as one arity-12 block per texel: row-major 3x3
// jacobian then translation.
void save_jacobian_field(const JacobianField& field, const std::string& path);
JacobianField load_jacobian_field(const std::string& path);

// Attribute maps serialize as five named sections (position, rotation,
// log_scale, opacity, color), each a length-prefixed name followed by a
// standard TXF1 block.
void save_attribute_maps(const LocalAttributeMaps& maps, const std::string& path);
LocalAttributeMaps load_attribute_maps(const std::string& path);

void write_mask_png(const ValidityMask& mask, const std::string& path);

}  // namespace texrig
