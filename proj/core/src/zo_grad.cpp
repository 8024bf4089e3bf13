#include "dtzo/zo_grad.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dtzo {

void SmoothingConfig::validate() const {
  if (!(mu > 0.0)) throw std::invalid_argument("SmoothingConfig: mu must be > 0");
  if (batch < 1) throw std::invalid_argument("SmoothingConfig: batch must be >= 1");
  if (!(lipschitz > 0.0))
    throw std::invalid_argument("SmoothingConfig: lipschitz must be > 0");
}

namespace {

double eval_checked(const ScalarFn& f, const Vec& x) {
  double v = f(x);
  if (!std::isfinite(v))
    throw std::runtime_error("zo_grad: non-finite objective value at query point");
  return v;
}

}  // namespace

Vec two_point_estimate(const ScalarFn& f, const Vec& x, double mu,
                       const Vec& u) {
  double base = eval_checked(f, x);
  return two_point_estimate_with_base(f, x, base, mu, u);
}

Vec two_point_estimate_with_base(const ScalarFn& f, const Vec& x, double base,
                                 double mu, const Vec& u) {
  require_size(u, x.size(), "two_point_estimate u");
  Vec xp = x;
  axpy(mu, u, xp);
  double fp = eval_checked(f, xp);
  return scaled(u, (fp - base) / mu);
}

GradEstimate multi_point_estimate(const ScalarFn& f, const Vec& x,
                                  const SmoothingConfig& cfg,
                                  RngStream& stream) {
  cfg.validate();
  const std::size_t d = x.size();
  double base = eval_checked(f, x);

  Vec mean(d, 0.0), m2(d, 0.0);
  for (int p = 0; p < cfg.batch; ++p) {
    Vec u = stream.gaussian_vec(d);
    Vec g = two_point_estimate_with_base(f, x, base, cfg.mu, u);
    // Welford accumulation
    for (std::size_t k = 0; k < d; ++k) {
      double delta = g[k] - mean[k];
      mean[k] += delta / static_cast<double>(p + 1);
      m2[k] += delta * (g[k] - mean[k]);
    }
  }

  GradEstimate out;
  out.g = std::move(mean);
  out.std_err.assign(d, 0.0);
  if (cfg.batch > 1) {
    double nb = static_cast<double>(cfg.batch);
    for (std::size_t k = 0; k < d; ++k)
      out.std_err[k] = std::sqrt(m2[k] / (nb - 1.0) / nb);
  }
  out.base = base;
  out.evals = cfg.batch + 1;
  return out;
}

McValue smoothed_value_mc(const ScalarFn& f, const Vec& x, double mu, int M,
                          RngStream& stream) {
  if (M < 1) throw std::invalid_argument("smoothed_value_mc: M must be >= 1");
  if (!(mu > 0.0)) throw std::invalid_argument("smoothed_value_mc: mu must be > 0");

  double mean = 0.0, m2 = 0.0;
  for (int i = 0; i < M; ++i) {
    Vec xp = x;
    axpy(mu, stream.gaussian_vec(x.size()), xp);
    double v = eval_checked(f, xp);
    double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }

  McValue out;
  out.mean = mean;
  out.samples = M;
  out.std_err = (M > 1)
                    ? std::sqrt(m2 / (M - 1.0) / static_cast<double>(M))
                    : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace dtzo
