#include "dtzo/baselines.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dtzo {

void BaselineConfig::validate() const {
  if (t_max < 1) throw std::invalid_argument("BaselineConfig: t_max < 1");
  if (!(eta > 0.0) || !(eta_lambda > 0.0))
    throw std::invalid_argument("BaselineConfig: step <= 0");
  if (!(varphi >= 0.0))
    throw std::invalid_argument("BaselineConfig: varphi < 0");
  if (!(mu > 0.0)) throw std::invalid_argument("BaselineConfig: mu <= 0");
  if (lookahead < 1)
    throw std::invalid_argument("BaselineConfig: lookahead < 1");
}

RunReport run_baseline(BaselineKind kind, const RobustHOInstance& inst,
                       const BaselineConfig& cfg) {
  cfg.validate();
  const Dims& dims = inst.dims;
  const int n = dims.n_workers;
  Problem prob = inst.to_problem();

  const bool tune_lambda =
      kind == BaselineKind::bilevel_zo && !cfg.fix_regularizer;
  const long per_worker_scalars =
      dims.d2 + (kind == BaselineKind::bilevel_zo && !cfg.fix_regularizer
                     ? dims.d1
                     : 0);

  Vec u(dims.d1, 0.0);
  std::vector<Vec> w(n, Vec(dims.d2, 0.0));
  Vec z_w(dims.d2, 0.0);
  const Vec zero3(dims.d3, 0.0);

  std::vector<RngStream> wstreams;
  for (int j = 0; j < n; ++j)
    wstreams.emplace_back(cfg.seed, StreamRole::worker,
                          static_cast<std::uint32_t>(j), purpose::block_x2);
  RngStream ustream(cfg.seed, StreamRole::master, 0, purpose::block_x1);
  RngStream look_root(cfg.seed, StreamRole::master, 0, purpose::generic);

  auto train_F = [&]() {
    double F = 0.0;
    for (int j = 0; j < n; ++j) {
      F += prob.f2[j].eval(u, w[j], zero3);
      Vec d = w[j];
      axpy(-1.0, z_w, d);
      F += cfg.varphi * norm_sq(d);
    }
    return F;
  };

  RunReport report;
  auto t_start = std::chrono::steady_clock::now();

  for (long t = 0; t < cfg.t_max; ++t) {
    for (int j = 0; j < n; ++j) {
      Vec dir = wstreams[j].gaussian_vec(dims.d2);
      double base = prob.f2[j].eval(u, w[j], zero3);
      Vec g = two_point_estimate_with_base(
          [&](const Vec& v) { return prob.f2[j].eval(u, v, zero3); }, w[j],
          base, cfg.mu, dir);
      for (int i = 0; i < dims.d2; ++i)
        g[i] += 2.0 * cfg.varphi * (w[j][i] - z_w[i]);
      axpy(-cfg.eta, g, w[j]);
      report.ledger.add_up(per_worker_scalars, CommPhase::iteration);
    }

    Vec gz(dims.d2, 0.0);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < dims.d2; ++i)
        gz[i] += 2.0 * cfg.varphi * (z_w[i] - w[j][i]);
    axpy(-cfg.eta, gz, z_w);

    if (tune_lambda) {
      // Value of the hyperparameter after a short training lookahead from
      // the current weights, replayed under common random numbers.
      RngStream look = look_root.substream(static_cast<std::uint32_t>(t));
      auto value = [&](const Vec& u_cand) {
        RngStream replay = look;  // snapshot; both evaluations share draws
        double v = 0.0;
        for (int j = 0; j < n; ++j) {
          Vec wl = w[j];
          for (int s = 0; s < cfg.lookahead; ++s) {
            Vec dir = replay.gaussian_vec(dims.d2);
            double base = prob.f2[j].eval(u_cand, wl, zero3);
            Vec g = two_point_estimate_with_base(
                [&](const Vec& x) { return prob.f2[j].eval(u_cand, x, zero3); },
                wl, base, cfg.mu, dir);
            axpy(-cfg.eta, g, wl);
          }
          v += prob.f1[j].eval(u_cand, wl, zero3);
        }
        return v / static_cast<double>(n);
      };
      Vec e = ustream.gaussian_vec(dims.d1);
      Vec gu = two_point_estimate(value, u, 0.05, e);
      axpy(-cfg.eta_lambda, gu, u);
    }

    for (int j = 0; j < n; ++j)
      report.ledger.add_down(per_worker_scalars, CommPhase::iteration);

    report.t_reached = t + 1;
    if ((t + 1) % 10 == 0 || t + 1 == cfg.t_max) {
      report.trace_t.push_back(t + 1);
      report.f_trace.push_back(train_F());
      report.gap_trace.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }

  auto t_end = std::chrono::steady_clock::now();
  report.wall_ms =
      cfg.deterministic_timing
          ? 0.0
          : std::chrono::duration<double, std::milli>(t_end - t_start).count();
  report.final_F = train_F();

  report.final_state = SystemState::zeros(dims);
  report.final_state.z1 = u;
  report.final_state.z2 = z_w;
  for (int j = 0; j < n; ++j) {
    report.final_state.x1[j] = u;
    report.final_state.x2[j] = w[j];
  }
  report.final_state.t = cfg.t_max;
  return report;
}

}  // namespace dtzo
