#include "dtzo/phi.hpp"

#include <stdexcept>

namespace dtzo {

void PhiConfig::validate(int n_workers) const {
  if (rounds < 1) throw std::invalid_argument("PhiConfig: rounds must be >= 1");
  if (!(eta_x > 0.0) || !(eta_z > 0.0))
    throw std::invalid_argument("PhiConfig: step sizes must be > 0");
  if (gamma.size() != static_cast<std::size_t>(n_workers) ||
      varphi.size() != static_cast<std::size_t>(n_workers))
    throw std::invalid_argument("PhiConfig: per-worker weight count mismatch");
  for (double g : gamma)
    if (!(g >= 0.0)) throw std::invalid_argument("PhiConfig: gamma < 0");
  for (double p : varphi)
    if (!(p >= 0.0)) throw std::invalid_argument("PhiConfig: varphi < 0");
  if (!(cut_penalty >= 0.0))
    throw std::invalid_argument("PhiConfig: cut_penalty < 0");
  smoothing.validate();
}

PhiConfig PhiConfig::defaults(int n_workers) {
  PhiConfig cfg;
  cfg.gamma.assign(n_workers, 1.0);
  cfg.varphi.assign(n_workers, 1.0);
  return cfg;
}

Vec cut_penalty_grad_block(const std::vector<QuadraticCut>& cuts, const Vec& v,
                           double penalty, int lo, int hi) {
  Vec grad(hi - lo, 0.0);
  for (const auto& cut : cuts) {
    double viol = cut.eval(v) - cut.slack;
    if (viol <= 0.0) continue;
    double w = 2.0 * penalty * viol;
    for (int k = lo; k < hi; ++k)
      grad[k - lo] += w * (2.0 * cut.a[k] * v[k] + cut.b[k]);
  }
  return grad;
}

KStepResult phi_in_kstep(const Dims& dims, const Vec& z1, const Vec& z2,
                         const std::vector<Vec>& x3_start, const Vec& z3_start,
                         const std::vector<Oracle>& f3, const PhiConfig& cfg,
                         RngStream stream) {
  cfg.validate(dims.n_workers);
  require_size(z1, dims.d1, "phi_in z1");
  require_size(z2, dims.d2, "phi_in z2");
  require_size(z3_start, dims.d3, "phi_in z3");
  if (x3_start.size() != static_cast<std::size_t>(dims.n_workers) ||
      f3.size() != static_cast<std::size_t>(dims.n_workers))
    throw std::invalid_argument("phi_in_kstep: worker count mismatch");

  std::vector<Vec> x3 = x3_start;
  Vec z3 = z3_start;
  const double mu = cfg.smoothing.mu;

  for (int k = 0; k < cfg.rounds; ++k) {
    for (int j = 0; j < dims.n_workers; ++j) {
      Vec u = stream.gaussian_vec(dims.d3);
      double base = f3[j].eval(z1, z2, x3[j]);
      Vec xp = x3[j];
      axpy(mu, u, xp);
      double fp = f3[j].eval(z1, z2, xp);
      Vec g = scaled(u, (fp - base) / mu);
      for (int i = 0; i < dims.d3; ++i)
        g[i] += 2.0 * cfg.gamma[j] * (x3[j][i] - z3[i]);
      axpy(-cfg.eta_x, g, x3[j]);
    }
    Vec gz(dims.d3, 0.0);
    for (int j = 0; j < dims.n_workers; ++j)
      for (int i = 0; i < dims.d3; ++i)
        gz[i] += cfg.gamma[j] * (z3[i] - x3[j][i]);
    axpy(-cfg.eta_z, gz, z3);
  }

  KStepResult out;
  for (int j = 0; j < dims.n_workers; ++j) {
    Vec d = x3[j];
    axpy(-1.0, x3_start[j], d);
    out.phi += norm_sq(d);
  }
  Vec dz = z3;
  axpy(-1.0, z3_start, dz);
  out.phi += norm_sq(dz);
  out.x_end = std::move(x3);
  out.z_end = std::move(z3);
  return out;
}

KStepResult phi_out_kstep(const Dims& dims, const Vec& z1,
                          const std::vector<Vec>& x2_start,
                          const std::vector<Vec>& x3, const Vec& z2_start,
                          const Vec& z3, const std::vector<Oracle>& f2,
                          const std::vector<QuadraticCut>& inner_pool,
                          const PhiConfig& cfg, RngStream stream) {
  cfg.validate(dims.n_workers);
  for (const auto& cut : inner_pool)
    if (cut.layer != CutLayer::inner)
      throw std::invalid_argument("phi_out_kstep: outer cut in inner pool");

  std::vector<Vec> x2 = x2_start;
  Vec z2 = z2_start;
  const double mu = cfg.smoothing.mu;
  const InnerLayout L{dims};

  for (int k = 0; k < cfg.rounds; ++k) {
    for (int j = 0; j < dims.n_workers; ++j) {
      Vec u = stream.gaussian_vec(dims.d2);
      double base = f2[j].eval(z1, x2[j], x3[j]);
      Vec xp = x2[j];
      axpy(mu, u, xp);
      double fp = f2[j].eval(z1, xp, x3[j]);
      Vec g = scaled(u, (fp - base) / mu);
      for (int i = 0; i < dims.d2; ++i)
        g[i] += 2.0 * cfg.varphi[j] * (x2[j][i] - z2[i]);
      axpy(-cfg.eta_x, g, x2[j]);
    }
    Vec gz(dims.d2, 0.0);
    for (int j = 0; j < dims.n_workers; ++j)
      for (int i = 0; i < dims.d2; ++i)
        gz[i] += 2.0 * cfg.varphi[j] * (z2[i] - x2[j][i]);
    if (!inner_pool.empty()) {
      Vec v = flatten_inner(dims, x3, z1, z2, z3);
      Vec gp = cut_penalty_grad_block(inner_pool, v, cfg.cut_penalty,
                                      L.z2_off(), L.z2_off() + dims.d2);
      axpy(1.0, gp, gz);
    }
    axpy(-cfg.eta_z, gz, z2);
  }

  KStepResult out;
  for (int j = 0; j < dims.n_workers; ++j) {
    Vec d = x2[j];
    axpy(-1.0, x2_start[j], d);
    out.phi += norm_sq(d);
  }
  Vec dz = z2;
  axpy(-1.0, z2_start, dz);
  out.phi += norm_sq(dz);
  out.x_end = std::move(x2);
  out.z_end = std::move(z2);
  return out;
}

ScalarFn make_phi_in_fn(const Dims& dims, const std::vector<Oracle>& f3,
                        const PhiConfig& cfg, const RngStream& frozen) {
  // Oracles are copied by value; copies share the evaluation counter.
  return [dims, f3, cfg, frozen](const Vec& v) {
    std::vector<Vec> x3;
    Vec z1, z2p, z3;
    unflatten_inner(dims, v, x3, z1, z2p, z3);
    return phi_in_kstep(dims, z1, z2p, x3, z3, f3, cfg, frozen).phi;
  };
}

ScalarFn make_phi_out_fn(const Dims& dims, const std::vector<Oracle>& f2,
                         std::vector<QuadraticCut> inner_pool,
                         const PhiConfig& cfg, const RngStream& frozen) {
  return [dims, f2, pool = std::move(inner_pool), cfg,
          frozen](const Vec& v) {
    std::vector<Vec> x2, x3;
    Vec z1, z2, z3;
    unflatten_outer(dims, v, x2, x3, z1, z2, z3);
    return phi_out_kstep(dims, z1, x2, x3, z2, z3, f2, pool, cfg, frozen).phi;
  };
}

}  // namespace dtzo
