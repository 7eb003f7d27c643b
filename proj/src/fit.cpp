#include "texrig/fit.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace texrig {

AdamState AdamState::zeros(size_t n) {
  AdamState s;
  s.m.assign(n, 0.0);
  s.v.assign(n, 0.0);
  return s;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamParams& p) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    fail(ErrorKind::ShapeMismatch, "adam: parameter/gradient/state sizes differ");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(p.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(p.beta2, static_cast<double>(state.step));
  const int64_t n = static_cast<int64_t>(params.size());
#pragma omp parallel for schedule(static)
  for (int64_t k = 0; k < n; ++k) {
    const double g = grads[k];
    state.m[k] = p.beta1 * state.m[k] + (1.0 - p.beta1) * g;
    state.v[k] = p.beta2 * state.v[k] + (1.0 - p.beta2) * g * g;
    const double m_hat = state.m[k] / bc1;
    const double v_hat = state.v[k] / bc2;
    params[k] -= p.lr * m_hat / (std::sqrt(v_hat) + p.eps);
  }
}

PreparedProblem prepare_problem(const FitProblem& problem) {
  if (problem.views.empty()) fail(ErrorKind::ConfigError, "fit problem has no views");
  PreparedProblem prep;
  prep.face_map = rasterize_faces(problem.rest, problem.uv_width, problem.uv_height);
  prep.mask = prep.face_map.coverage_mask();
  prep.reg_unit =
      problem.reg_scale_unit > 0.0 ? problem.reg_scale_unit : mean_edge_length(problem.rest);
  for (const FitView& view : problem.views) {
    MeshPair pair = load_pair(problem.rest, view.deformed);
    prep.view_frames.push_back(all_face_frames(pair, FrameVariant::FullJacobian));
    if (problem.variant == LiftVariant::QuasiPhong) {
      JacobianField field = build_jacobian_field(prep.view_frames.back(), prep.face_map);
      prep.view_fields.push_back(dilate_field(field, problem.dilation_rings));
    }
  }
  return prep;
}

TotalLossResult total_loss(const FitProblem& problem, const PreparedProblem& prepared,
                           const LocalAttributeMaps& local, const LossWeights& weights) {
  TotalLossResult result;
  result.grads = LocalMapGrads::zeros(local.width(), local.height());
  const size_t n_views = problem.views.size();
  const double inv_views = 1.0 / static_cast<double>(n_views);

  for (size_t f = 0; f < n_views; ++f) {
    const FitView& view = problem.views[f];

    GlobalGaussianSet set;
    QuasiPhongForward qp;
    if (problem.variant == LiftVariant::QuasiPhong) {
      qp = lift_quasi_phong_forward(local, prepared.view_fields[f]);
      set = std::move(qp.set);
    } else {
      set = lift_naive(local, prepared.face_map, prepared.view_frames[f]);
    }

    const RenderOutput rendered = render(set, view.camera);
    const double l1 = loss_l1(rendered.image, view.target);
    const double ssim = loss_ssim(rendered.image, view.target);
    result.l1 += l1 * inv_views;
    result.ssim += ssim * inv_views;

    // dL/dimage for this view's share of the reconstruction loss
    Image d_image = loss_l1_backward(rendered.image, view.target);
    const Image d_ssim = loss_ssim_backward(rendered.image, view.target);
    const double wl1 = weights.lambda_l1 * inv_views;
    const double wss = weights.lambda_ssim * inv_views;
    for (size_t k = 0; k < d_image.rgb.size(); ++k)
      d_image.rgb[k] = wl1 * d_image.rgb[k] + wss * d_ssim.rgb[k];

    const GaussianGrads g_set = render_backward(set, view.camera, d_image);
    if (problem.variant == LiftVariant::QuasiPhong) {
      result.grads.add_scaled(lift_quasi_phong_backward(local, prepared.view_fields[f], g_set),
                              1.0);
    } else {
      result.grads.add_scaled(
          lift_naive_backward(local, prepared.face_map, prepared.view_frames[f], g_set), 1.0);
    }
    result.renders.push_back(rendered.image);
  }

  const double eps_mu = weights.eps_mu * prepared.reg_unit;
  const double eps_s = weights.eps_s * prepared.reg_unit;
  result.reg_mu = loss_reg_position(local, eps_mu);
  result.reg_s = loss_reg_scale(local, eps_s);
  if (weights.lambda_reg_mu != 0.0) {
    const TexelGrid g = loss_reg_position_backward(local, eps_mu);
    for (size_t k = 0; k < g.data.size(); ++k)
      result.grads.position.data[k] += weights.lambda_reg_mu * g.data[k];
  }
  if (weights.lambda_reg_s != 0.0) {
    const TexelGrid g = loss_reg_scale_backward(local, eps_s);
    for (size_t k = 0; k < g.data.size(); ++k)
      result.grads.log_scale.data[k] += weights.lambda_reg_s * g.data[k];
  }

  result.total = weights.lambda_l1 * result.l1 + weights.lambda_ssim * result.ssim +
                 weights.lambda_reg_mu * result.reg_mu + weights.lambda_reg_s * result.reg_s;
  return result;
}

FitResult fit(const FitProblem& problem, const FitOptions& options, const LossWeights& weights,
              LocalAttributeMaps initial) {
  initial.validate_shapes();
  const PreparedProblem prepared = prepare_problem(problem);

  FitResult result;
  result.maps = std::move(initial);
  LocalAttributeMaps& maps = result.maps;

  struct Group {
    TexelGrid* params;
    AdamState state;
    AdamParams adam;
  };
  const AdamParams base{0.0, options.beta1, options.beta2, options.adam_eps};
  auto make_group = [&](TexelGrid& g, double lr) {
    Group grp{&g, AdamState::zeros(g.data.size()), base};
    grp.adam.lr = lr;
    return grp;
  };
  Group groups[5] = {
      make_group(maps.position_raw, options.lr_position),
      make_group(maps.rotation_raw, options.lr_rotation),
      make_group(maps.log_scale_raw, options.lr_log_scale),
      make_group(maps.opacity_raw, options.lr_opacity),
      make_group(maps.color_raw, options.lr_color),
  };

  for (int it = 0; it < options.iterations; ++it) {
    const TotalLossResult loss = total_loss(problem, prepared, maps, weights);
    if (!std::isfinite(loss.total))
      fail(ErrorKind::NonFiniteLoss, "non-finite loss at iteration " + std::to_string(it));
    result.trace.push_back({it, loss.total, loss.l1, loss.ssim, loss.reg_mu, loss.reg_s});

    const TexelGrid* grads[5] = {&loss.grads.position, &loss.grads.rotation,
                                 &loss.grads.log_scale, &loss.grads.opacity, &loss.grads.color};
    for (int g = 0; g < 5; ++g)
      adam_step(groups[g].params->data, grads[g]->data, groups[g].state, groups[g].adam);
  }
  return result;
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot open '" + path + "' for writing");
  out << "iteration,total,l1,ssim,reg_mu,reg_s\n";
  char buf[256];
  for (const TraceRow& row : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.iteration, row.total,
                  row.l1, row.ssim, row.reg_mu, row.reg_s);
    out << buf;
  }
}

}  // namespace texrig
