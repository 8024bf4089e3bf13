#pragma once

#include "dtzo/cuts.hpp"
#include "dtzo/layout.hpp"
#include "dtzo/rng.hpp"
#include "dtzo/types.hpp"
#include "dtzo/zo_grad.hpp"

namespace dtzo {

/// Configuration of the K-round soft-constraint residual estimators.
struct PhiConfig {
  int rounds = 1;           // K
  double eta_x = 0.05;      // worker step size
  double eta_z = 0.05;      // master step size
  Vec gamma;                // third-level proximity weights, one per worker
  Vec varphi;               // second-level proximity weights, one per worker
  double cut_penalty = 1.0; // p_l, shared across inner cuts
  SmoothingConfig smoothing{1e-4, 1, 1.0};
  bool common_random_numbers = true;

  void validate(int n_workers) const;
  static PhiConfig defaults(int n_workers);
};

struct KStepResult {
  double phi = 0.0;          // squared norm of the K-step displacement
  std::vector<Vec> x_end;    // terminal worker blocks
  Vec z_end;                 // terminal consensus block
};

/// K synchronous rounds of worker zeroth-order descent on
/// f3_j(z1, z2, x3_j) + gamma_j ||x3_j - z3||^2 with master averaging of
/// z3; phi = ||[start_x3; start_z3] - [x3^K; z3^K]||^2.
/// The stream is taken by value: re-running from the same snapshot gives
/// identical output (common random numbers).
KStepResult phi_in_kstep(const Dims& dims, const Vec& z1, const Vec& z2,
                         const std::vector<Vec>& x3_start, const Vec& z3_start,
                         const std::vector<Oracle>& f3, const PhiConfig& cfg,
                         RngStream stream);

/// Same scheme one level up: workers descend f2_j(z1, x2_j, x3_j) +
/// varphi_j ||x2_j - z2||^2; the master z2 step adds the analytic gradient
/// of the inner-cut penalty sum restricted to the z2 block.
KStepResult phi_out_kstep(const Dims& dims, const Vec& z1,
                          const std::vector<Vec>& x2_start,
                          const std::vector<Vec>& x3, const Vec& z2_start,
                          const Vec& z3, const std::vector<Oracle>& f2,
                          const std::vector<QuadraticCut>& inner_pool,
                          const PhiConfig& cfg, RngStream stream);

/// Wraps phi_in_kstep as a scalar function over the inner cut space.
/// Every call replays the frozen stream snapshot, so finite differences
/// of the returned function see only the perturbation of the argument.
ScalarFn make_phi_in_fn(const Dims& dims, const std::vector<Oracle>& f3,
                        const PhiConfig& cfg, const RngStream& frozen);

ScalarFn make_phi_out_fn(const Dims& dims, const std::vector<Oracle>& f2,
                         std::vector<QuadraticCut> inner_pool,
                         const PhiConfig& cfg, const RngStream& frozen);

/// Gradient of p * sum_l [max(h_l(v) - slack_l, 0)]^2 at v, coordinates
/// [lo, hi). Shared by phi_out_kstep and tests.
Vec cut_penalty_grad_block(const std::vector<QuadraticCut>& cuts, const Vec& v,
                           double penalty, int lo, int hi);

}  // namespace dtzo
