// image.hpp — RGB image buffer, PNG and float-dump I/O, PSNR.
#pragma once

#include "texrig/core.hpp"

#include <cstdint>
#include <vector>

namespace texrig {

// Row-major RGB, values in [0,1] for display paths (buffers also carry
// gradients, which may be any finite value).
struct Image {
  int width = 0, height = 0;
  std::vector<double> rgb;  // 3 per pixel

  static Image constant(int w, int h, const Vec3& c);
  static Image zeros(int w, int h) { return constant(w, h, Vec3::Zero()); }

  double* at(int x, int y) { return rgb.data() + (static_cast<size_t>(y) * width + x) * 3; }
  const double* at(int x, int y) const {
    return rgb.data() + (static_cast<size_t>(y) * width + x) * 3;
  }
  Vec3 pixel(int x, int y) const {
    const double* p = at(x, y);
    return {p[0], p[1], p[2]};
  }
  void set_pixel(int x, int y, const Vec3& c) {
    double* p = at(x, y);
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }
  size_t pixel_count() const { return static_cast<size_t>(width) * height; }
  bool same_shape(const Image& o) const { return width == o.width && height == o.height; }
};

double psnr(const Image& a, const Image& b);

// 8-bit sRGB PNG; quantization is clamp to [0,1] then round half up, so
// image-comparison tests can be bit-exact.
void write_png(const Image& img, const std::string& path);
Image read_png(const std::string& path);
void write_png_gray(const std::vector<uint8_t>& gray, int width, int height,
                    const std::string& path);

// 32-bit float dump for tests: u32 width, u32 height, u32 channels(=3), then
// float32 row-major. Little-endian.
void write_f32(const Image& img, const std::string& path);
Image read_f32(const std::string& path);

}  // namespace texrig
