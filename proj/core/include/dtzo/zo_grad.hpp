#pragma once

#include <functional>

#include "dtzo/rng.hpp"
#include "dtzo/vec.hpp"

namespace dtzo {

struct SmoothingConfig {
  double mu = 1e-3;       // smoothing parameter
  int batch = 1;          // 1 = plain two-point estimator
  double lipschitz = 1.0; // smoothness constant L (user-supplied)
  void validate() const;
};

using ScalarFn = std::function<double(const Vec&)>;

/// ((f(x + mu*u) - f(x)) / mu) * u. Exactly 2 evaluations of f.
Vec two_point_estimate(const ScalarFn& f, const Vec& x, double mu,
                       const Vec& u);

/// Same, with the unperturbed value supplied by the caller (1 evaluation).
Vec two_point_estimate_with_base(const ScalarFn& f, const Vec& x, double base,
                                 double mu, const Vec& u);

struct GradEstimate {
  Vec g;           // mean of batch two-point estimates
  Vec std_err;     // per-coordinate standard error (zero for batch 1)
  double base;     // f(x), shared across the batch
  int evals;       // oracle evaluations consumed (batch + 1)
};

/// Mini-batch estimator: mean of `cfg.batch` independent two-point
/// estimates sharing one base evaluation (batch + 1 evaluations total).
GradEstimate multi_point_estimate(const ScalarFn& f, const Vec& x,
                                  const SmoothingConfig& cfg,
                                  RngStream& stream);

struct McValue {
  double mean;
  double std_err;  // NaN when samples == 1
  int samples;
};

/// Monte-Carlo estimate of the mu-smooth approximation: mean of
/// f(x + mu*u) over M standard Gaussian draws.
McValue smoothed_value_mc(const ScalarFn& f, const Vec& x, double mu, int M,
                          RngStream& stream);

}  // namespace dtzo
