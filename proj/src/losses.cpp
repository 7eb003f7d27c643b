#include "texrig/losses.hpp"

#include <cmath>

namespace texrig {

double loss_l1(const Image& image, const Image& target) {
  if (!image.same_shape(target)) fail(ErrorKind::ShapeMismatch, "l1: image shapes differ");
  const int h = image.height, w = image.width;
  std::vector<double> row_sums(h, 0.0);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < h; ++y) {
    double s = 0.0;
    const double* a = image.at(0, y);
    const double* b = target.at(0, y);
    for (int k = 0; k < w * 3; ++k) s += std::abs(a[k] - b[k]);
    row_sums[y] = s;
  }
  double total = 0.0;
  for (int y = 0; y < h; ++y) total += row_sums[y];
  return total / static_cast<double>(image.rgb.size());
}

Image loss_l1_backward(const Image& image, const Image& target) {
  if (!image.same_shape(target)) fail(ErrorKind::ShapeMismatch, "l1: image shapes differ");
  Image grad = Image::zeros(image.width, image.height);
  const double inv = 1.0 / static_cast<double>(image.rgb.size());
  for (size_t k = 0; k < image.rgb.size(); ++k) {
    const double d = image.rgb[k] - target.rgb[k];
    grad.rgb[k] = d > 0.0 ? inv : (d < 0.0 ? -inv : 0.0);
  }
  return grad;
}

namespace {

constexpr int kWindow = 11;
constexpr int kHalf = kWindow / 2;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

const double* ssim_kernel() {
  static const std::array<double, kWindow> k = [] {
    std::array<double, kWindow> w{};
    double sum = 0.0;
    for (int i = 0; i < kWindow; ++i) {
      w[i] = std::exp(-0.5 * (i - kHalf) * (i - kHalf) / (1.5 * 1.5));
      sum += w[i];
    }
    for (double& v : w) v /= sum;
    return w;
  }();
  return k.data();
}

// Single-channel plane helpers; planes are width*height row-major doubles.
struct Plane {
  int w = 0, h = 0;
  std::vector<double> v;
  Plane() = default;
  Plane(int w_, int h_) : w(w_), h(h_), v(static_cast<size_t>(w_) * h_, 0.0) {}
  double& at(int x, int y) { return v[static_cast<size_t>(y) * w + x]; }
  double at(int x, int y) const { return v[static_cast<size_t>(y) * w + x]; }
};

// Horizontal then vertical window pass; output defined on the valid interior
// [kHalf, w-1-kHalf] x [kHalf, h-1-kHalf], zero elsewhere.
Plane window_filter(const Plane& in) {
  const double* ker = ssim_kernel();
  Plane tmp(in.w, in.h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < in.h; ++y) {
    for (int x = kHalf; x < in.w - kHalf; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += ker[k] * in.at(x - kHalf + k, y);
      tmp.at(x, y) = s;
    }
  }
  Plane out(in.w, in.h);
#pragma omp parallel for schedule(static)
  for (int y = kHalf; y < in.h - kHalf; ++y) {
    for (int x = kHalf; x < in.w - kHalf; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += ker[k] * tmp.at(x, y - kHalf + k);
      out.at(x, y) = s;
    }
  }
  return out;
}

// Adjoint of window_filter: scatters an interior field back over the full
// image. The kernel is symmetric, so this is the same separable filter with
// swapped roles of input and output domains.
Plane window_scatter(const Plane& in) {
  const double* ker = ssim_kernel();
  Plane tmp(in.w, in.h);
#pragma omp parallel for schedule(static)
  for (int y = kHalf; y < in.h - kHalf; ++y) {
    for (int x = 0; x < in.w; ++x) {
      double s = 0.0;
      const int k_lo = std::max(0, kHalf - x);
      const int k_hi = std::min(kWindow, in.w - 1 + kHalf - x + 1);
      for (int k = k_lo; k < k_hi; ++k) {
        const int cx = x - kHalf + k;  // center whose window covers x
        if (cx < kHalf || cx > in.w - 1 - kHalf) continue;
        s += ker[kWindow - 1 - k] * in.at(cx, y);
      }
      tmp.at(x, y) = s;
    }
  }
  Plane out(in.w, in.h);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < in.h; ++y) {
    for (int x = 0; x < in.w; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) {
        const int cy = y - kHalf + k;
        if (cy < kHalf || cy > in.h - 1 - kHalf) continue;
        s += ker[kWindow - 1 - k] * tmp.at(x, cy);
      }
      out.at(x, y) = s;
    }
  }
  return out;
}

Plane channel_plane(const Image& img, int c) {
  Plane p(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) p.at(x, y) = img.at(x, y)[c];
  return p;
}

struct SsimMoments {
  Plane mu_x, mu_y, sxx, syy, sxy;  // variances/covariance, biased
};

SsimMoments ssim_moments(const Plane& x, const Plane& y) {
  Plane x2(x.w, x.h), y2(x.w, x.h), xy(x.w, x.h);
  for (size_t k = 0; k < x.v.size(); ++k) {
    x2.v[k] = x.v[k] * x.v[k];
    y2.v[k] = y.v[k] * y.v[k];
    xy.v[k] = x.v[k] * y.v[k];
  }
  SsimMoments m;
  m.mu_x = window_filter(x);
  m.mu_y = window_filter(y);
  m.sxx = window_filter(x2);
  m.syy = window_filter(y2);
  m.sxy = window_filter(xy);
  for (size_t k = 0; k < x.v.size(); ++k) {
    m.sxx.v[k] -= m.mu_x.v[k] * m.mu_x.v[k];
    m.syy.v[k] -= m.mu_y.v[k] * m.mu_y.v[k];
    m.sxy.v[k] -= m.mu_x.v[k] * m.mu_y.v[k];
  }
  return m;
}

void require_ssim_shapes(const Image& image, const Image& target) {
  if (!image.same_shape(target)) fail(ErrorKind::ShapeMismatch, "ssim: image shapes differ");
  if (image.width < kWindow || image.height < kWindow)
    fail(ErrorKind::ImageTooSmall, "ssim requires images at least 11x11");
}

}  // namespace

double loss_ssim(const Image& image, const Image& target) {
  require_ssim_shapes(image, target);
  const int w = image.width, h = image.height;
  const double n_pos = static_cast<double>(w - 2 * kHalf) * (h - 2 * kHalf);
  double mean_ssim = 0.0;
  for (int c = 0; c < 3; ++c) {
    const Plane x = channel_plane(image, c);
    const Plane y = channel_plane(target, c);
    const SsimMoments m = ssim_moments(x, y);
    double acc = 0.0;
    for (int py = kHalf; py < h - kHalf; ++py) {
      for (int px = kHalf; px < w - kHalf; ++px) {
        const double mx = m.mu_x.at(px, py), my = m.mu_y.at(px, py);
        const double a1 = 2.0 * mx * my + kC1;
        const double a2 = 2.0 * m.sxy.at(px, py) + kC2;
        const double b1 = mx * mx + my * my + kC1;
        const double b2 = m.sxx.at(px, py) + m.syy.at(px, py) + kC2;
        acc += (a1 * a2) / (b1 * b2);
      }
    }
    mean_ssim += acc / n_pos;
  }
  return 1.0 - mean_ssim / 3.0;
}

Image loss_ssim_backward(const Image& image, const Image& target) {
  require_ssim_shapes(image, target);
  const int w = image.width, h = image.height;
  const double n_pos = static_cast<double>(w - 2 * kHalf) * (h - 2 * kHalf);
  const double scale = -1.0 / (3.0 * n_pos);  // d(1 - mean)/dS per position

  Image grad = Image::zeros(w, h);
  for (int c = 0; c < 3; ++c) {
    const Plane x = channel_plane(image, c);
    const Plane y = channel_plane(target, c);
    const SsimMoments m = ssim_moments(x, y);

    // Per-position partials of S wrt mu_x, sigma_x^2 and sigma_xy, plus the
    // mu-weighted variants needed by the chain through the moments.
    Plane f_mu(w, h), f_sxx(w, h), f_sxy(w, h), f_sxx_mu(w, h), f_sxy_mu(w, h);
    for (int py = kHalf; py < h - kHalf; ++py) {
      for (int px = kHalf; px < w - kHalf; ++px) {
        const double mx = m.mu_x.at(px, py), my = m.mu_y.at(px, py);
        const double a1 = 2.0 * mx * my + kC1;
        const double a2 = 2.0 * m.sxy.at(px, py) + kC2;
        const double b1 = mx * mx + my * my + kC1;
        const double b2 = m.sxx.at(px, py) + m.syy.at(px, py) + kC2;
        const double inv_b1b2 = 1.0 / (b1 * b2);
        const double s = a1 * a2 * inv_b1b2;
        const double ds_dmu = 2.0 * my * a2 * inv_b1b2 - s * 2.0 * mx / b1;
        const double ds_dsxx = -s / b2;
        const double ds_dsxy = 2.0 * a1 * inv_b1b2;
        f_mu.at(px, py) = ds_dmu;
        f_sxx.at(px, py) = ds_dsxx;
        f_sxy.at(px, py) = ds_dsxy;
        f_sxx_mu.at(px, py) = ds_dsxx * mx;
        f_sxy_mu.at(px, py) = ds_dsxy * my;
      }
    }

    const Plane g_mu = window_scatter(f_mu);
    const Plane g_sxx = window_scatter(f_sxx);
    const Plane g_sxy = window_scatter(f_sxy);
    const Plane g_sxx_mu = window_scatter(f_sxx_mu);
    const Plane g_sxy_mu = window_scatter(f_sxy_mu);

    for (int py = 0; py < h; ++py) {
      for (int px = 0; px < w; ++px) {
        const double xv = x.at(px, py);
        const double yv = y.at(px, py);
        const double d = g_mu.at(px, py) + 2.0 * xv * g_sxx.at(px, py) -
                         2.0 * g_sxx_mu.at(px, py) + yv * g_sxy.at(px, py) -
                         g_sxy_mu.at(px, py);
        grad.at(px, py)[c] = scale * d;
      }
    }
  }
  return grad;
}

double loss_reg_position(const LocalAttributeMaps& local, double eps_mu) {
  const size_t n = local.mask.count_valid();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (int j = 0; j < local.height(); ++j) {
    for (int i = 0; i < local.width(); ++i) {
      if (!local.mask.valid(i, j)) continue;
      const double* p = local.position_raw.at(i, j);
      for (int c = 0; c < 3; ++c) sum += std::max(std::abs(p[c]) - eps_mu, 0.0);
    }
  }
  return sum / (3.0 * static_cast<double>(n));
}

TexelGrid loss_reg_position_backward(const LocalAttributeMaps& local, double eps_mu) {
  TexelGrid grad = TexelGrid::zeros(local.width(), local.height(), 3);
  const size_t n = local.mask.count_valid();
  if (n == 0) return grad;
  const double inv = 1.0 / (3.0 * static_cast<double>(n));
  for (int j = 0; j < local.height(); ++j) {
    for (int i = 0; i < local.width(); ++i) {
      if (!local.mask.valid(i, j)) continue;
      const double* p = local.position_raw.at(i, j);
      double* g = grad.at(i, j);
      for (int c = 0; c < 3; ++c)
        if (std::abs(p[c]) > eps_mu) g[c] = (p[c] > 0.0 ? inv : -inv);
    }
  }
  return grad;
}

double loss_reg_scale(const LocalAttributeMaps& local, double eps_s) {
  const size_t n = local.mask.count_valid();
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (int j = 0; j < local.height(); ++j) {
    for (int i = 0; i < local.width(); ++i) {
      if (!local.mask.valid(i, j)) continue;
      const double* l = local.log_scale_raw.at(i, j);
      for (int c = 0; c < 3; ++c) sum += std::max(std::exp(l[c]) - eps_s, 0.0);
    }
  }
  return sum / (3.0 * static_cast<double>(n));
}

TexelGrid loss_reg_scale_backward(const LocalAttributeMaps& local, double eps_s) {
  TexelGrid grad = TexelGrid::zeros(local.width(), local.height(), 3);
  const size_t n = local.mask.count_valid();
  if (n == 0) return grad;
  const double inv = 1.0 / (3.0 * static_cast<double>(n));
  for (int j = 0; j < local.height(); ++j) {
    for (int i = 0; i < local.width(); ++i) {
      if (!local.mask.valid(i, j)) continue;
      const double* l = local.log_scale_raw.at(i, j);
      double* g = grad.at(i, j);
      for (int c = 0; c < 3; ++c) {
        const double s = std::exp(l[c]);
        if (s > eps_s) g[c] = inv * s;
      }
    }
  }
  return grad;
}

}  // namespace texrig
