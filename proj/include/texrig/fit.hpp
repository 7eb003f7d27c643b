// fit.hpp — total objective (reconstruction + regularizers) with gradients
// through render -> lift -> activations, and the adaptive gradient-descent
// loop over raw texel attribute maps.
#pragma once

#include "texrig/losses.hpp"
#include "texrig/render.hpp"

#include <span>

namespace texrig {

enum class LiftVariant { Naive, QuasiPhong };

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-15;
};

struct AdamState {
  std::vector<double> m, v;
  int64_t step = 0;

  static AdamState zeros(size_t n);
};

// One bias-corrected moment update over a parameter block.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamParams& p);

// One observation: deformed pose, camera, target image.
struct FitView {
  TriMesh deformed;
  Camera camera;
  Image target;
};

struct FitProblem {
  TriMesh rest;
  std::vector<FitView> views;
  int uv_width = 0, uv_height = 0;
  int dilation_rings = 2;
  LiftVariant variant = LiftVariant::QuasiPhong;
  // eps_mu/eps_s in LossWeights are multiples of this length (mean rest edge
  // length by default), so the bounds adapt to mesh scale.
  double reg_scale_unit = 0.0;  // 0 -> computed from the rest mesh
};

// Rasterization and per-view frames/fields, built once.
struct PreparedProblem {
  FaceIdMap face_map;
  ValidityMask mask;
  std::vector<std::vector<FaceFrame>> view_frames;
  std::vector<JacobianField> view_fields;  // dilated; empty when variant == Naive
  double reg_unit = 0.0;
};

PreparedProblem prepare_problem(const FitProblem& problem);

struct TotalLossResult {
  double total = 0.0;
  double l1 = 0.0;    // averaged over views
  double ssim = 0.0;  // averaged over views
  double reg_mu = 0.0;
  double reg_s = 0.0;
  LocalMapGrads grads;
  std::vector<Image> renders;
};

// Renders every view from the current maps, evaluates the weighted objective
// and chains gradients back to all raw local maps.
TotalLossResult total_loss(const FitProblem& problem, const PreparedProblem& prepared,
                           const LocalAttributeMaps& local, const LossWeights& weights);

struct FitOptions {
  int iterations = 2000;
  double lr_position = 1.6e-4;
  double lr_rotation = 1e-3;
  double lr_log_scale = 1e-3;
  double lr_opacity = 5e-2;
  double lr_color = 2.5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-15;
  uint64_t seed = 0;
};

struct TraceRow {
  int iteration;
  double total, l1, ssim, reg_mu, reg_s;
};

struct FitResult {
  LocalAttributeMaps maps;
  std::vector<TraceRow> trace;
};

// Deterministic given the problem, options and initial maps. Aborts with
// NonFiniteLoss (naming the iteration) if the objective leaves the reals.
FitResult fit(const FitProblem& problem, const FitOptions& options, const LossWeights& weights,
              LocalAttributeMaps initial);

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

}  // namespace texrig
