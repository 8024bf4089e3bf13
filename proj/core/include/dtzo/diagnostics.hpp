#pragma once

#include <optional>
#include <string>

#include "dtzo/cuts.hpp"
#include "dtzo/problems.hpp"

namespace dtzo {

struct ContainmentReport {
  int n_cuts = 0;
  int n_satisfied = 0;
  double worst_violation = 0.0;  // max over cuts of max(h(v*) - slack, 0)
  double mean_excess = 0.0;      // mean of the same quantity over all cuts
  std::uint64_t seed = 0;

  static std::string csv_header();
  std::string to_csv_row() const;
};

/// Generates n_trials cuts of the given layer at random iterates of a
/// closed-form quadratic instance (exact residual oracle, perturbation
/// batch `batch`) and evaluates each at the instance's exact feasible
/// point. The containment bound predicts h <= slack there.
ContainmentReport test_containment(const QuadraticInstance& inst,
                                   CutLayer layer, int n_trials, int batch,
                                   const SmoothingConfig& smoothing,
                                   RngStream& stream);

struct SmoothingCheck {
  double estimate = 0.0;
  double exact = 0.0;  // f(x) + (mu^2 / 2) * trace(Hessian)
  double std_err = 0.0;
};

/// Monte-Carlo check of the Gaussian smoothing identity for a quadratic f
/// with known Hessian trace.
SmoothingCheck test_smoothing_identity(const ScalarFn& f, const Vec& x,
                                       double hessian_trace, double mu, int M,
                                       RngStream& stream);

/// First index with gap <= eps, or nullopt.
std::optional<std::size_t> detect_T_eps(const std::vector<double>& gap_trace,
                                        double eps);

/// Number of probe points satisfying every cut in the list (h <= slack).
int count_satisfying(const std::vector<QuadraticCut>& cuts,
                     const std::vector<Vec>& probes);

}  // namespace dtzo
