#include "dtzo/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "dtzo/layout.hpp"

namespace dtzo {

namespace {

Vec affine(const Vec& base, const std::vector<Vec>& M, const Vec& x) {
  Vec out = base;
  for (std::size_t r = 0; r < M.size(); ++r) out[r] += dot(M[r], x);
  return out;
}

/// grad_out[m] -= sum_r coeff[r] * M[r][m]  (transpose-apply)
void subtract_mt(const std::vector<Vec>& M, const Vec& coeff, Vec& grad_out) {
  for (std::size_t r = 0; r < M.size(); ++r)
    for (std::size_t m = 0; m < grad_out.size(); ++m)
      grad_out[m] -= coeff[r] * M[r][m];
}

double quad_value(const Vec& q, const Vec& x, const Vec& t) {
  double s = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) {
    double d = x[k] - t[k];
    s += q[k] * d * d;
  }
  return s;
}

/// Fixed point of the proximal consensus dynamics for diagonal quadratics:
/// worker stationarity x_j = (q_j t_j + w_j z) / (q_j + w_j), master
/// stationarity z = weighted mean of x_j; solves to a weighted mean of the
/// targets with weights w_j q_j / (q_j + w_j).
void consensus_fixed_point(const std::vector<Vec>& q,
                           const std::vector<Vec>& t, const Vec& weights,
                           std::vector<Vec>& x_out, Vec& z_out) {
  const std::size_t n = q.size(), d = q[0].size();
  z_out.assign(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double a = weights[j] * q[j][k] / (q[j][k] + weights[j]);
      num += a * t[j][k];
      den += a;
    }
    z_out[k] = num / den;
  }
  x_out.assign(n, Vec(d, 0.0));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < d; ++k)
      x_out[j][k] = (q[j][k] * t[j][k] + weights[j] * z_out[k]) /
                    (q[j][k] + weights[j]);
}

Vec weighted_mean(const std::vector<Vec>& q, const std::vector<Vec>& t) {
  const std::size_t d = q[0].size();
  Vec out(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < q.size(); ++j) {
      num += q[j][k] * t[j][k];
      den += q[j][k];
    }
    out[k] = num / den;
  }
  return out;
}

std::vector<double> grid_axis() {
  std::vector<double> g;
  for (int i = 0; i <= 20; ++i) g.push_back(-2.0 + 0.2 * i);
  return g;
}

/// Exhaustive argmin of `f` over the grid_axis() lattice in `d` dims.
Vec grid_argmin(int d, const std::function<double(const Vec&)>& f) {
  auto axis = grid_axis();
  Vec point(d, 0.0), best(d, 0.0);
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    for (int k = 0; k < d; ++k) point[k] = axis[idx[k]];
    double v = f(point);
    if (v < best_val) {
      best_val = v;
      best = point;
    }
    int k = 0;
    while (k < d && ++idx[k] == axis.size()) idx[k++] = 0;
    if (k == d) break;
  }
  return best;
}

void grid_self_check(const QuadraticInstance& inst) {
  const Dims& dims = inst.dims;
  auto close = [](const Vec& a, const Vec& b) {
    for (std::size_t k = 0; k < a.size(); ++k)
      if (std::abs(a[k] - b[k]) > 0.2 + 1e-12) return false;
    return true;
  };

  Vec g1 = grid_argmin(dims.d1, [&](const Vec& z1) {
    double s = 0.0;
    for (int j = 0; j < dims.n_workers; ++j)
      s += quad_value(inst.q1[j], z1, inst.t1[j]);
    return s;
  });
  Vec g2 = grid_argmin(dims.d2, [&](const Vec& z2) {
    double s = 0.0;
    for (int j = 0; j < dims.n_workers; ++j)
      s += quad_value(inst.q2[j], z2, inst.t2_of(j, inst.z1_star));
    return s;
  });
  Vec g3 = grid_argmin(dims.d3, [&](const Vec& z3) {
    double s = 0.0;
    for (int j = 0; j < dims.n_workers; ++j)
      s += quad_value(inst.q3[j], z3,
                      inst.t3_of(j, inst.z1_star, inst.z2_star));
    return s;
  });
  if (!close(g1, inst.z1_star) || !close(g2, inst.z2_star) ||
      !close(g3, inst.z3_star))
    throw std::logic_error("gen_quadratic: grid check disagrees with the "
                           "closed-form solution");
}

void stationarity_self_check(const QuadraticInstance& inst) {
  const Dims& dims = inst.dims;
  auto residual = [&](const std::vector<Vec>& q, const std::vector<Vec>& t,
                      const Vec& z) {
    double worst = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
      double r = 0.0;
      for (int j = 0; j < dims.n_workers; ++j)
        r += q[j][k] * (z[k] - t[j][k]);
      worst = std::max(worst, std::abs(r));
    }
    return worst;
  };
  std::vector<Vec> t2(dims.n_workers), t3(dims.n_workers);
  for (int j = 0; j < dims.n_workers; ++j) {
    t2[j] = inst.t2_of(j, inst.z1_star);
    t3[j] = inst.t3_of(j, inst.z1_star, inst.z2_star);
  }
  if (residual(inst.q1, inst.t1, inst.z1_star) > 1e-10 ||
      residual(inst.q2, t2, inst.z2_star) > 1e-10 ||
      residual(inst.q3, t3, inst.z3_star) > 1e-10)
    throw std::logic_error(
        "gen_quadratic: stored solution fails first-order conditions");
}

}  // namespace

Vec QuadraticInstance::t2_of(int j, const Vec& z1) const {
  return affine(t2_0[j], A[j], z1);
}

Vec QuadraticInstance::t3_of(int j, const Vec& z1, const Vec& z2) const {
  Vec t = affine(t3_0[j], B[j], z1);
  for (std::size_t r = 0; r < C[j].size(); ++r) t[r] += dot(C[j][r], z2);
  return t;
}

double QuadraticInstance::exact_phi_in(const Vec& v) const {
  std::vector<Vec> x3;
  Vec z1, z2p, z3;
  unflatten_inner(dims, v, x3, z1, z2p, z3);

  std::vector<Vec> t3(dims.n_workers);
  for (int j = 0; j < dims.n_workers; ++j) t3[j] = t3_of(j, z1, z2p);
  std::vector<Vec> x3_star;
  Vec z3_star;
  consensus_fixed_point(q3, t3, phi.gamma, x3_star, z3_star);

  double out = 0.0;
  for (int j = 0; j < dims.n_workers; ++j) {
    Vec d = x3[j];
    axpy(-1.0, x3_star[j], d);
    out += norm_sq(d);
  }
  Vec dz = z3;
  axpy(-1.0, z3_star, dz);
  return out + norm_sq(dz);
}

double QuadraticInstance::exact_phi_out(const Vec& v) const {
  std::vector<Vec> x2, x3;
  Vec z1, z2, z3;
  unflatten_outer(dims, v, x2, x3, z1, z2, z3);

  std::vector<Vec> t2(dims.n_workers);
  for (int j = 0; j < dims.n_workers; ++j) t2[j] = t2_of(j, z1);
  std::vector<Vec> x2_star;
  Vec z2_star;
  consensus_fixed_point(q2, t2, phi.varphi, x2_star, z2_star);

  double out = 0.0;
  for (int j = 0; j < dims.n_workers; ++j) {
    Vec d = x2[j];
    axpy(-1.0, x2_star[j], d);
    out += norm_sq(d);
  }
  Vec dz = z2;
  axpy(-1.0, z2_star, dz);
  return out + norm_sq(dz);
}

Vec QuadraticInstance::feasible_inner_point(const Vec& z1,
                                            const Vec& z2) const {
  std::vector<Vec> t3(dims.n_workers);
  for (int j = 0; j < dims.n_workers; ++j) t3[j] = t3_of(j, z1, z2);
  std::vector<Vec> x3;
  Vec z3;
  consensus_fixed_point(q3, t3, phi.gamma, x3, z3);
  return flatten_inner(dims, x3, z1, z2, z3);
}

Vec QuadraticInstance::feasible_outer_point(const Vec& z1) const {
  std::vector<Vec> t2(dims.n_workers);
  for (int j = 0; j < dims.n_workers; ++j) t2[j] = t2_of(j, z1);
  std::vector<Vec> x2;
  Vec z2;
  consensus_fixed_point(q2, t2, phi.varphi, x2, z2);

  std::vector<Vec> t3(dims.n_workers);
  for (int j = 0; j < dims.n_workers; ++j) t3[j] = t3_of(j, z1, z2);
  std::vector<Vec> x3;
  Vec z3;
  consensus_fixed_point(q3, t3, phi.gamma, x3, z3);
  return flatten_outer(dims, x2, x3, z1, z2, z3);
}

Problem QuadraticInstance::to_problem() const {
  Problem p;
  p.dims = dims;
  const int d1 = dims.d1, d2 = dims.d2, d3 = dims.d3;

  for (int j = 0; j < dims.n_workers; ++j) {
    p.f1.emplace_back(
        1, j,
        [q = q1[j], t = t1[j]](const Vec& a, const Vec&, const Vec&) {
          return quad_value(q, a, t);
        },
        [q = q1[j], t = t1[j], d2, d3](const Vec& a, const Vec&,
                                       const Vec&) -> std::array<Vec, 3> {
          Vec ga(a.size());
          for (std::size_t k = 0; k < a.size(); ++k)
            ga[k] = 2.0 * q[k] * (a[k] - t[k]);
          return {std::move(ga), Vec(d2, 0.0), Vec(d3, 0.0)};
        });
    p.f2.emplace_back(
        2, j,
        [q = q2[j], t0 = t2_0[j], M = A[j]](const Vec& a, const Vec& b,
                                            const Vec&) {
          return quad_value(q, b, affine(t0, M, a));
        },
        [q = q2[j], t0 = t2_0[j], M = A[j], d1, d3](
            const Vec& a, const Vec& b, const Vec&) -> std::array<Vec, 3> {
          Vec t = affine(t0, M, a);
          Vec r(b.size());
          for (std::size_t k = 0; k < b.size(); ++k)
            r[k] = 2.0 * q[k] * (b[k] - t[k]);
          Vec ga(d1, 0.0);
          subtract_mt(M, r, ga);
          return {std::move(ga), std::move(r), Vec(d3, 0.0)};
        });
    p.f3.emplace_back(
        3, j,
        [self = *this, j](const Vec& a, const Vec& b, const Vec& c) {
          return quad_value(self.q3[j], c, self.t3_of(j, a, b));
        },
        [q = q3[j], t0 = t3_0[j], Mb = B[j], Mc = C[j], d1, d2](
            const Vec& a, const Vec& b, const Vec& c) -> std::array<Vec, 3> {
          Vec t = affine(t0, Mb, a);
          for (std::size_t rr = 0; rr < Mc.size(); ++rr) t[rr] += dot(Mc[rr], b);
          Vec r(c.size());
          for (std::size_t k = 0; k < c.size(); ++k)
            r[k] = 2.0 * q[k] * (c[k] - t[k]);
          Vec ga(d1, 0.0), gb(d2, 0.0);
          subtract_mt(Mb, r, ga);
          subtract_mt(Mc, r, gb);
          return {std::move(ga), std::move(gb), std::move(r)};
        });
  }

  p.phi_in_exact = [self = *this](const Vec& v) {
    return self.exact_phi_in(v);
  };
  p.phi_out_exact = [self = *this](const Vec& v) {
    return self.exact_phi_out(v);
  };
  return p;
}

QuadraticInstance gen_quadratic(const Dims& dims, std::uint64_t seed) {
  dims.validate();
  RngStream rng(seed, StreamRole::test, 0, purpose::data);
  auto coeff = [&rng](int n) {
    Vec v(n);
    for (auto& x : v) x = 0.5 + rng.uniform();
    return v;
  };
  auto target = [&rng](int n) {
    Vec v(n);
    for (auto& x : v) x = 2.0 * rng.uniform() - 1.0;
    return v;
  };
  auto matrix = [&rng](int rows, int cols) {
    std::vector<Vec> M(rows, Vec(cols));
    for (auto& row : M)
      for (auto& x : row) x = 0.4 * rng.uniform() - 0.2;
    return M;
  };

  QuadraticInstance inst;
  inst.dims = dims;
  inst.phi = PhiConfig::defaults(dims.n_workers);
  inst.phi.rounds = 3;
  inst.phi.eta_x = 0.1;
  inst.phi.eta_z = 0.1;
  for (int j = 0; j < dims.n_workers; ++j) {
    inst.q1.push_back(coeff(dims.d1));
    inst.t1.push_back(target(dims.d1));
    inst.q2.push_back(coeff(dims.d2));
    inst.t2_0.push_back(target(dims.d2));
    inst.A.push_back(matrix(dims.d2, dims.d1));
    inst.q3.push_back(coeff(dims.d3));
    inst.t3_0.push_back(target(dims.d3));
    inst.B.push_back(matrix(dims.d3, dims.d1));
    inst.C.push_back(matrix(dims.d3, dims.d2));
  }

  inst.z1_star = weighted_mean(inst.q1, inst.t1);
  std::vector<Vec> t2(dims.n_workers), t3(dims.n_workers);
  for (int j = 0; j < dims.n_workers; ++j)
    t2[j] = inst.t2_of(j, inst.z1_star);
  inst.z2_star = weighted_mean(inst.q2, t2);
  for (int j = 0; j < dims.n_workers; ++j)
    t3[j] = inst.t3_of(j, inst.z1_star, inst.z2_star);
  inst.z3_star = weighted_mean(inst.q3, t3);

  stationarity_self_check(inst);
  if (dims.d1 <= 2 && dims.d2 <= 2 && dims.d3 <= 2) grid_self_check(inst);
  return inst;
}

// ----------------------------------------------- robust hyperparameter opt

namespace {

constexpr int kFeatureDim = 10;
constexpr int kHidden = 8;

double stable_logloss(double margin) {
  // log(1 + exp(-margin))
  return margin > 0.0 ? std::log1p(std::exp(-margin))
                      : -margin + std::log1p(std::exp(margin));
}

double model_score(ModelKind model, const Vec& w, const Vec& x) {
  if (model == ModelKind::logistic) {
    double s = w[kFeatureDim];
    for (int i = 0; i < kFeatureDim; ++i) s += w[i] * x[i];
    return s;
  }
  // mlp layout: W1 (8 x 10) row-major, b1 (8), W2 (8), b2
  const double* W1 = w.data();
  const double* b1 = w.data() + kHidden * kFeatureDim;
  const double* W2 = b1 + kHidden;
  double b2 = W2[kHidden];
  double s = b2;
  for (int h = 0; h < kHidden; ++h) {
    double pre = b1[h];
    for (int i = 0; i < kFeatureDim; ++i) pre += W1[h * kFeatureDim + i] * x[i];
    if (pre > 0.0) s += W2[h] * pre;
  }
  return s;
}

int weight_count(ModelKind model) {
  return model == ModelKind::logistic
             ? kFeatureDim + 1
             : kHidden * kFeatureDim + kHidden + kHidden + 1;
}

}  // namespace

double RobustHOInstance::lambda_of(const Vec& u) const {
  double x = u[0];
  double sp = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  return 0.1 * sp;
}

Vec RobustHOInstance::perturbation(const Vec& x3) const {
  Vec p(x3.size());
  for (std::size_t i = 0; i < x3.size(); ++i) p[i] = radius * std::tanh(x3[i]);
  return p;
}

double RobustHOInstance::loss(const Vec& w, const Dataset& data,
                              const Vec* perturb) const {
  double total = 0.0;
  Vec x(kFeatureDim);
  for (std::size_t r = 0; r < data.X.size(); ++r) {
    if (perturb) {
      for (int i = 0; i < kFeatureDim; ++i) x[i] = data.X[r][i] + (*perturb)[i];
    } else {
      x = data.X[r];
    }
    double s = model_score(model, w, x);
    double yhat = data.y[r] ? 1.0 : -1.0;
    total += stable_logloss(yhat * s);
  }
  return total / static_cast<double>(data.X.size());
}

bool RobustHOInstance::predict_correct(const Vec& w, const Vec& x,
                                       int y) const {
  return (model_score(model, w, x) > 0.0) == (y == 1);
}

Vec RobustHOInstance::input_gradient(const Vec& w, const Vec& x, int y) const {
  double s = model_score(model, w, x);
  double yhat = y ? 1.0 : -1.0;
  // d/ds log(1 + exp(-yhat s)) = -yhat * sigmoid(-yhat s)
  double m = -yhat * s;
  double dls = -yhat / (1.0 + std::exp(-m));

  Vec g(kFeatureDim, 0.0);
  if (model == ModelKind::logistic) {
    for (int i = 0; i < kFeatureDim; ++i) g[i] = dls * w[i];
    return g;
  }
  const double* W1 = w.data();
  const double* b1 = w.data() + kHidden * kFeatureDim;
  const double* W2 = b1 + kHidden;
  for (int h = 0; h < kHidden; ++h) {
    double pre = b1[h];
    for (int i = 0; i < kFeatureDim; ++i) pre += W1[h * kFeatureDim + i] * x[i];
    if (pre <= 0.0) continue;
    double c = dls * W2[h];
    for (int i = 0; i < kFeatureDim; ++i) g[i] += c * W1[h * kFeatureDim + i];
  }
  return g;
}

Problem RobustHOInstance::to_problem() const {
  Problem p;
  p.dims = dims;
  auto self = std::make_shared<const RobustHOInstance>(*this);
  for (int j = 0; j < dims.n_workers; ++j) {
    p.f1.emplace_back(1, j,
                      [self, j](const Vec&, const Vec& w, const Vec&) {
                        return self->loss(w, self->val[j], nullptr);
                      });
    p.f2.emplace_back(2, j, [self, j](const Vec& u, const Vec& w,
                                      const Vec& x3) {
      Vec pert = self->perturbation(x3);
      return self->loss(w, self->train[j], &pert) +
             self->lambda_of(u) * norm_sq(w);
    });
    p.f3.emplace_back(3, j,
                      [self, j](const Vec&, const Vec& w, const Vec& x3) {
                        Vec pert = self->perturbation(x3);
                        return -self->loss(w, self->train[j], &pert);
                      });
  }
  return p;
}

RobustHOInstance gen_robust_ho(int n_workers, std::uint64_t seed,
                               ModelKind model) {
  if (n_workers < 1)
    throw std::invalid_argument("gen_robust_ho: n_workers < 1");

  RobustHOInstance inst;
  inst.model = model;
  inst.seed = seed;
  inst.dims = Dims{1, weight_count(model), kFeatureDim, n_workers};

  for (int j = 0; j < n_workers; ++j) {
    RngStream rng(seed, StreamRole::test, static_cast<std::uint32_t>(j),
                  purpose::data);
    Vec mean = rng.gaussian_vec(kFeatureDim);
    double norm = std::sqrt(norm_sq(mean));
    for (auto& m : mean) m *= 1.2 / norm;

    auto draw = [&](int per_class) {
      Dataset d;
      for (int cls = 0; cls < 2; ++cls) {
        double sign = cls ? 1.0 : -1.0;
        for (int s = 0; s < per_class; ++s) {
          Vec x = rng.gaussian_vec(kFeatureDim);
          axpy(sign, mean, x);
          d.X.push_back(std::move(x));
          d.y.push_back(cls);
        }
      }
      return d;
    };
    Dataset train = draw(100);
    Dataset val = draw(50);

    // Standardize per feature using the training statistics.
    for (int i = 0; i < kFeatureDim; ++i) {
      double m = 0.0;
      for (const auto& x : train.X) m += x[i];
      m /= static_cast<double>(train.X.size());
      double v = 0.0;
      for (const auto& x : train.X) v += (x[i] - m) * (x[i] - m);
      double sd = std::sqrt(v / static_cast<double>(train.X.size()));
      if (sd < 1e-8) sd = 1.0;
      for (auto& x : train.X) x[i] = (x[i] - m) / sd;
      for (auto& x : val.X) x[i] = (x[i] - m) / sd;
    }
    inst.train.push_back(std::move(train));
    inst.val.push_back(std::move(val));
  }
  return inst;
}

Metrics evaluate_metric(const Vec& w, const RobustHOInstance& inst) {
  require_size(w, weight_count(inst.model), "evaluate_metric weights");
  const double alpha = 2.5 * inst.radius / 7.0;
  long total = 0, clean = 0, adv = 0;

  for (const auto& data : inst.val) {
    for (std::size_t r = 0; r < data.X.size(); ++r) {
      ++total;
      bool clean_ok = inst.predict_correct(w, data.X[r], data.y[r]);
      if (!clean_ok) continue;
      ++clean;

      Vec delta(kFeatureDim, 0.0);
      Vec x = data.X[r];
      for (int step = 0; step < 7; ++step) {
        for (int i = 0; i < kFeatureDim; ++i) x[i] = data.X[r][i] + delta[i];
        Vec g = inst.input_gradient(w, x, data.y[r]);
        for (int i = 0; i < kFeatureDim; ++i) {
          delta[i] += alpha * (g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0));
          delta[i] = std::clamp(delta[i], -inst.radius, inst.radius);
        }
      }
      for (int i = 0; i < kFeatureDim; ++i) x[i] = data.X[r][i] + delta[i];
      if (inst.predict_correct(w, x, data.y[r])) ++adv;
    }
  }

  Metrics m;
  m.clean_acc = static_cast<double>(clean) / static_cast<double>(total);
  m.adv_acc = static_cast<double>(adv) / static_cast<double>(total);
  m.avg = 0.5 * (m.clean_acc + m.adv_acc);
  return m;
}

}  // namespace dtzo
