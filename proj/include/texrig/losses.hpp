// losses.hpp — photometric losses (L1, SSIM) with analytic image gradients,
// and the per-texel lower-bound regularizers on local positions and scales.
#pragma once

#include "texrig/gaussians.hpp"
#include "texrig/image.hpp"

namespace texrig {

struct LossWeights {
  double lambda_l1 = 0.8;
  double lambda_ssim = 0.2;
  double lambda_reg_mu = 0.0;
  double lambda_reg_s = 0.0;
  double eps_mu = 1.0;  // mesh units; see FitProblem::reg_scale_unit
  double eps_s = 0.6;
};

// Mean absolute difference over all pixels and channels.
double loss_l1(const Image& image, const Image& target);
Image loss_l1_backward(const Image& image, const Image& target);

// 1 - mean SSIM, 11x11 Gaussian window sigma 1.5, C1=(0.01)^2, C2=(0.03)^2 on
// unit dynamic range, per channel then averaged. The mean runs over window
// positions fully inside the image (hence the >= 11 size requirement).
double loss_ssim(const Image& image, const Image& target);
Image loss_ssim_backward(const Image& image, const Image& target);

// Hinge on local position magnitude: mean over valid texels and components of
// max(|mu| - eps_mu, 0). Zero value and zero gradient inside the bound.
double loss_reg_position(const LocalAttributeMaps& local, double eps_mu);
TexelGrid loss_reg_position_backward(const LocalAttributeMaps& local, double eps_mu);

// Same hinge on activated scales exp(log_scale); gradient flows to the raw
// log-scales.
double loss_reg_scale(const LocalAttributeMaps& local, double eps_s);
TexelGrid loss_reg_scale_backward(const LocalAttributeMaps& local, double eps_s);

}  // namespace texrig
