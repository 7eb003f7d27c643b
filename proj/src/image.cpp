#include "texrig/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace texrig {

Image Image::constant(int w, int h, const Vec3& c) {
  Image img;
  img.width = w;
  img.height = h;
  img.rgb.resize(static_cast<size_t>(w) * h * 3);
  for (size_t p = 0; p < img.pixel_count(); ++p) {
    img.rgb[p * 3 + 0] = c[0];
    img.rgb[p * 3 + 1] = c[1];
    img.rgb[p * 3 + 2] = c[2];
  }
  return img;
}

double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) fail(ErrorKind::ShapeMismatch, "psnr: image shapes differ");
  double se = 0.0;
  for (size_t k = 0; k < a.rgb.size(); ++k) {
    const double d = a.rgb[k] - b.rgb[k];
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.rgb.size());
  if (mse < 1e-30) return 300.0;
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

uint8_t quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<uint8_t>(std::floor(c * 255.0 + 0.5));  // round half up
}

struct PngWriteCtx {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngWriteCtx() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
};

struct PngReadCtx {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngReadCtx() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

void write_png_rows(const std::vector<uint8_t>& bytes, int width, int height, int channels,
                    const std::string& path) {
  PngWriteCtx ctx;
  ctx.fp = std::fopen(path.c_str(), "wb");
  if (!ctx.fp) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  ctx.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.png || !ctx.info) fail(ErrorKind::IoError, "libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) fail(ErrorKind::IoError, "libpng write failed for '" + path + "'");
  png_init_io(ctx.png, ctx.fp);
  const int color = channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
  png_set_IHDR(ctx.png, ctx.info, width, height, 8, color, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(ctx.png, ctx.info);
  for (int y = 0; y < height; ++y)
    png_write_row(ctx.png, const_cast<png_bytep>(bytes.data() + static_cast<size_t>(y) * width * channels));
  png_write_end(ctx.png, nullptr);
}

}  // namespace

void write_png(const Image& img, const std::string& path) {
  std::vector<uint8_t> bytes(img.pixel_count() * 3);
  for (size_t k = 0; k < img.rgb.size(); ++k) bytes[k] = quantize(img.rgb[k]);
  write_png_rows(bytes, img.width, img.height, 3, path);
}

void write_png_gray(const std::vector<uint8_t>& gray, int width, int height,
                    const std::string& path) {
  write_png_rows(gray, width, height, 1, path);
}

Image read_png(const std::string& path) {
  PngReadCtx ctx;
  ctx.fp = std::fopen(path.c_str(), "rb");
  if (!ctx.fp) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.png || !ctx.info) fail(ErrorKind::IoError, "libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png))) fail(ErrorKind::IoError, "libpng read failed for '" + path + "'");
  png_init_io(ctx.png, ctx.fp);
  png_read_info(ctx.png, ctx.info);

  png_set_expand(ctx.png);
  png_set_strip_16(ctx.png);
  png_set_strip_alpha(ctx.png);
  png_set_gray_to_rgb(ctx.png);
  png_read_update_info(ctx.png, ctx.info);

  const int width = static_cast<int>(png_get_image_width(ctx.png, ctx.info));
  const int height = static_cast<int>(png_get_image_height(ctx.png, ctx.info));
  std::vector<uint8_t> row(static_cast<size_t>(width) * 3);
  Image img = Image::zeros(width, height);
  for (int y = 0; y < height; ++y) {
    png_read_row(ctx.png, row.data(), nullptr);
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < 3; ++c)
        img.at(x, y)[c] = row[static_cast<size_t>(x) * 3 + c] / 255.0;
  }
  return img;
}

void write_f32(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  const uint32_t header[3] = {static_cast<uint32_t>(img.width), static_cast<uint32_t>(img.height), 3u};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  std::vector<float> buf(img.rgb.size());
  for (size_t k = 0; k < buf.size(); ++k) buf[k] = static_cast<float>(img.rgb[k]);
  out.write(reinterpret_cast<const char*>(buf.data()), sizeof(float) * buf.size());
  if (!out) fail(ErrorKind::IoError, "write failed for '" + path + "'");
}

Image read_f32(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path + "'");
  uint32_t header[3];
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in || header[2] != 3) fail(ErrorKind::ParseError, "bad float image header in '" + path + "'");
  Image img = Image::zeros(static_cast<int>(header[0]), static_cast<int>(header[1]));
  std::vector<float> buf(img.rgb.size());
  in.read(reinterpret_cast<char*>(buf.data()), sizeof(float) * buf.size());
  if (!in) fail(ErrorKind::ParseError, "float image payload truncated in '" + path + "'");
  for (size_t k = 0; k < buf.size(); ++k) img.rgb[k] = buf[k];
  return img;
}

}  // namespace texrig
