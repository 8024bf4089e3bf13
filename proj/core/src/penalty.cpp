#include "dtzo/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dtzo/layout.hpp"

namespace dtzo {

double PenaltyConfig::lambda_for(const QuadraticCut& cut) const {
  auto it = lambda_override.find(cut.id);
  return it == lambda_override.end() ? lambda : it->second;
}

void PenaltyConfig::validate(int n_workers) const {
  if (!(lambda > 0.0))
    throw std::invalid_argument("PenaltyConfig: lambda must be > 0");
  for (const auto& [id, l] : lambda_override)
    if (!(l > 0.0))
      throw std::invalid_argument("PenaltyConfig: lambda override must be > 0");
  if (phi_j.size() != static_cast<std::size_t>(n_workers))
    throw std::invalid_argument("PenaltyConfig: phi_j count mismatch");
  for (double p : phi_j)
    if (!(p > 0.0))
      throw std::invalid_argument("PenaltyConfig: phi_j must be > 0");
  if (!(eps_in >= 0.0) || !(eps_out >= 0.0))
    throw std::invalid_argument("PenaltyConfig: eps < 0");
}

PenaltyConfig PenaltyConfig::defaults(int n_workers, double lambda,
                                      double phi) {
  PenaltyConfig cfg;
  cfg.lambda = lambda;
  cfg.phi_j.assign(n_workers, phi);
  return cfg;
}

void StepSizes::validate() const {
  for (double s : {x1, x2, x3, z1, z2, z3})
    if (!(s > 0.0)) throw std::invalid_argument("StepSizes: step <= 0");
}

double eval_o(const std::vector<QuadraticCut>& outer, const Dims& dims,
              const SystemState& state, const PenaltyConfig& pcfg) {
  if (outer.empty()) return 0.0;
  Vec v = flatten_outer(dims, state);
  double o = 0.0;
  for (const auto& cut : outer) {
    if (cut.layer != CutLayer::outer)
      throw std::invalid_argument("eval_o: inner cut in outer pool");
    double viol = std::max(cut.eval(v) - cut.slack, 0.0);
    o += pcfg.lambda_for(cut) * viol * viol;
  }
  return o;
}

OuterGrad OuterGrad::zeros(const Dims& dims) {
  OuterGrad g;
  g.x2.assign(dims.n_workers, Vec(dims.d2, 0.0));
  g.x3.assign(dims.n_workers, Vec(dims.d3, 0.0));
  g.z1.assign(dims.d1, 0.0);
  g.z2.assign(dims.d2, 0.0);
  g.z3.assign(dims.d3, 0.0);
  return g;
}

OuterGrad grad_o(const std::vector<QuadraticCut>& outer, const Dims& dims,
                 const SystemState& state, const PenaltyConfig& pcfg) {
  OuterGrad out = OuterGrad::zeros(dims);
  if (outer.empty()) return out;

  Vec v = flatten_outer(dims, state);
  Vec flat(v.size(), 0.0);
  for (const auto& cut : outer) {
    if (cut.layer != CutLayer::outer)
      throw std::invalid_argument("grad_o: inner cut in outer pool");
    double viol = cut.eval(v) - cut.slack;
    if (viol <= 0.0) continue;
    double w = 2.0 * pcfg.lambda_for(cut) * viol;
    for (std::size_t k = 0; k < v.size(); ++k)
      flat[k] += w * (2.0 * cut.a[k] * v[k] + cut.b[k]);
  }

  const OuterLayout L{dims};
  for (int j = 0; j < dims.n_workers; ++j) {
    std::copy_n(flat.begin() + L.x2_off(j), dims.d2, out.x2[j].begin());
    std::copy_n(flat.begin() + L.x3_off(j), dims.d3, out.x3[j].begin());
  }
  std::copy_n(flat.begin() + L.z1_off(), dims.d1, out.z1.begin());
  std::copy_n(flat.begin() + L.z2_off(), dims.d2, out.z2.begin());
  std::copy_n(flat.begin() + L.z3_off(), dims.d3, out.z3.begin());
  return out;
}

double eval_F(const Dims& dims, const SystemState& state,
              const std::vector<Oracle>& f1,
              const std::vector<QuadraticCut>& outer,
              const PenaltyConfig& pcfg) {
  pcfg.validate(dims.n_workers);
  if (f1.size() != static_cast<std::size_t>(dims.n_workers))
    throw std::invalid_argument("eval_F: oracle count mismatch");

  double F = eval_o(outer, dims, state, pcfg);
  for (int j = 0; j < dims.n_workers; ++j) {
    F += f1[j].eval(state.x1[j], state.x2[j], state.x3[j]);
    Vec d = state.x1[j];
    axpy(-1.0, state.z1, d);
    F += pcfg.phi_j[j] * norm_sq(d);
  }
  return F;
}

namespace {

double gap_from_f1_grads(const Dims& dims, const SystemState& state,
                         const std::vector<std::array<Vec, 3>>& df1,
                         const std::vector<QuadraticCut>& outer,
                         const PenaltyConfig& pcfg) {
  OuterGrad og = grad_o(outer, dims, state, pcfg);
  double gap = 0.0;

  // x1_j: grad f1_j wrt x1 + 2 phi_j (x1_j - z1)
  for (int j = 0; j < dims.n_workers; ++j) {
    Vec g = df1[j][0];
    for (int i = 0; i < dims.d1; ++i)
      g[i] += 2.0 * pcfg.phi_j[j] * (state.x1[j][i] - state.z1[i]);
    gap += norm_sq(g);
  }
  // x2_j / x3_j: grad f1_j + outer-cut penalty blocks
  for (int j = 0; j < dims.n_workers; ++j) {
    Vec g2 = df1[j][1];
    axpy(1.0, og.x2[j], g2);
    gap += norm_sq(g2);
    Vec g3 = df1[j][2];
    axpy(1.0, og.x3[j], g3);
    gap += norm_sq(g3);
  }
  // z1: consensus term plus penalty block
  Vec gz1 = og.z1;
  for (int j = 0; j < dims.n_workers; ++j)
    for (int i = 0; i < dims.d1; ++i)
      gz1[i] += 2.0 * pcfg.phi_j[j] * (state.z1[i] - state.x1[j][i]);
  gap += norm_sq(gz1);
  gap += norm_sq(og.z2);
  gap += norm_sq(og.z3);
  return gap;
}

}  // namespace

double stationarity_gap(const Dims& dims, const SystemState& state,
                        const std::vector<Oracle>& f1,
                        const std::vector<QuadraticCut>& outer,
                        const PenaltyConfig& pcfg) {
  pcfg.validate(dims.n_workers);
  std::vector<std::array<Vec, 3>> df1;
  df1.reserve(dims.n_workers);
  for (int j = 0; j < dims.n_workers; ++j) {
    if (!f1[j].has_gradient())
      throw std::runtime_error("stationarity_gap: f1 oracle lacks gradient");
    df1.push_back(f1[j].gradient(state.x1[j], state.x2[j], state.x3[j]));
  }
  return gap_from_f1_grads(dims, state, df1, outer, pcfg);
}

GapEstimate stationarity_gap_zo(const Dims& dims, const SystemState& state,
                                const std::vector<Oracle>& f1,
                                const std::vector<QuadraticCut>& outer,
                                const PenaltyConfig& pcfg,
                                const SmoothingConfig& smoothing, int batch,
                                RngStream& stream) {
  pcfg.validate(dims.n_workers);
  SmoothingConfig cfg = smoothing;
  cfg.batch = batch;
  cfg.validate();

  std::vector<std::array<Vec, 3>> df1(dims.n_workers);
  double var = 0.0;
  for (int j = 0; j < dims.n_workers; ++j) {
    const Oracle& f = f1[j];
    const Vec &x1 = state.x1[j], &x2 = state.x2[j], &x3 = state.x3[j];
    ScalarFn fns[3] = {
        [&](const Vec& v) { return f.eval(v, x2, x3); },
        [&](const Vec& v) { return f.eval(x1, v, x3); },
        [&](const Vec& v) { return f.eval(x1, x2, v); },
    };
    const Vec* pts[3] = {&x1, &x2, &x3};
    for (int blk = 0; blk < 3; ++blk) {
      GradEstimate est = multi_point_estimate(fns[blk], *pts[blk], cfg, stream);
      df1[j][blk] = std::move(est.g);
      for (double se : est.std_err) var += se * se;
    }
  }
  GapEstimate out;
  out.gap = gap_from_f1_grads(dims, state, df1, outer, pcfg);
  out.std_err = std::sqrt(var);
  return out;
}

StepSizes default_step_sizes(double L, const Dims& dims, long T, long T1) {
  if (!(L > 0.0))
    throw std::invalid_argument("default_step_sizes: L must be > 0");
  if (T <= T1)
    throw std::invalid_argument("default_step_sizes: requires T > T1");
  double s = 1.0 / (8.0 * L * (dims.d1 + 4));
  s = std::min(s, 1.0 / (8.0 * L * (dims.d2 + 4)));
  s = std::min(s, 1.0 / (8.0 * L * (dims.d3 + 4)));
  s = std::min(s, 3.0 / (2.0 * (L + 1.0)));
  s = std::min(s, 1.0 / std::sqrt(static_cast<double>(T - T1)));
  StepSizes steps;
  steps.x1 = steps.x2 = steps.x3 = steps.z1 = steps.z2 = steps.z3 = s;
  return steps;
}

std::vector<int> consensus_bound_violations(const Dims& dims,
                                            const SystemState& state,
                                            const std::vector<Oracle>& f1,
                                            const PenaltyConfig& pcfg) {
  double C = 0.0;
  for (int j = 0; j < dims.n_workers; ++j)
    C = std::max(C, std::abs(f1[j].eval(state.x1[j], state.x2[j],
                                        state.x3[j])));
  C *= 2.0;

  std::vector<int> bad;
  for (int j = 0; j < dims.n_workers; ++j) {
    if (!(pcfg.phi_j[j] > 0.0)) continue;
    Vec d = state.x1[j];
    axpy(-1.0, state.z1, d);
    if (norm_sq(d) > dims.n_workers * C / pcfg.phi_j[j]) bad.push_back(j);
  }
  return bad;
}

}  // namespace dtzo
