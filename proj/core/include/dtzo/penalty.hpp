#pragma once

#include <unordered_map>

#include "dtzo/cuts.hpp"
#include "dtzo/types.hpp"
#include "dtzo/zo_grad.hpp"

namespace dtzo {

struct PenaltyConfig {
  double lambda = 1.0;  // shared outer-cut penalty weight
  std::unordered_map<long, double> lambda_override;  // optional per-cut values
  Vec phi_j;            // consensus penalty weights, one per worker
  double eps_in = 0.0;
  double eps_out = 0.0;

  double lambda_for(const QuadraticCut& cut) const;
  void validate(int n_workers) const;
  static PenaltyConfig defaults(int n_workers, double lambda = 1.0,
                                double phi = 1.0);
};

struct StepSizes {
  double x1 = 0.0, x2 = 0.0, x3 = 0.0;
  double z1 = 0.0, z2 = 0.0, z3 = 0.0;
  void validate() const;
};

/// o(.) = sum_l lambda_l [max(h_l(v_out) - eps_out, 0)]^2 over outer cuts.
/// Each cut's own stored slack is used as eps_out.
double eval_o(const std::vector<QuadraticCut>& outer, const Dims& dims,
              const SystemState& state, const PenaltyConfig& pcfg);

/// Analytic block gradients of o. x1 blocks are identically zero (o does
/// not depend on x1), so only the remaining 2N+3 blocks are returned.
struct OuterGrad {
  std::vector<Vec> x2, x3;  // per worker
  Vec z1, z2, z3;

  static OuterGrad zeros(const Dims& dims);
};
OuterGrad grad_o(const std::vector<QuadraticCut>& outer, const Dims& dims,
                 const SystemState& state, const PenaltyConfig& pcfg);

/// F = sum_j f1_j(x1_j, x2_j, x3_j) + phi_j ||x1_j - z1||^2 + o(.)
double eval_F(const Dims& dims, const SystemState& state,
              const std::vector<Oracle>& f1,
              const std::vector<QuadraticCut>& outer,
              const PenaltyConfig& pcfg);

/// White-box stationarity gap: sum of squared norms of the 3N+3 block
/// gradients of F. Requires gradient oracles on f1.
double stationarity_gap(const Dims& dims, const SystemState& state,
                        const std::vector<Oracle>& f1,
                        const std::vector<QuadraticCut>& outer,
                        const PenaltyConfig& pcfg);

struct GapEstimate {
  double gap = 0.0;
  double std_err = 0.0;  // propagated from the f1 gradient estimates
};

/// Black-box variant: f1 block gradients replaced by multi-point
/// estimates. Diagnostic only, never used to drive updates.
GapEstimate stationarity_gap_zo(const Dims& dims, const SystemState& state,
                                const std::vector<Oracle>& f1,
                                const std::vector<QuadraticCut>& outer,
                                const PenaltyConfig& pcfg,
                                const SmoothingConfig& smoothing, int batch,
                                RngStream& stream);

/// Default schedule: every step size equals
/// min{1/(8L(d1+4)), 1/(8L(d2+4)), 1/(8L(d3+4)), 3/(2(L+1)), 1/sqrt(T-T1)}.
StepSizes default_step_sizes(double L, const Dims& dims, long T, long T1);

/// Consensus-distance monitor: returns the workers j whose
/// ||x1_j - z1||^2 exceeds N*C/phi_j, with C = 2*max_j |f1_j| observed at
/// the current state. Advisory; callers warn rather than abort.
std::vector<int> consensus_bound_violations(const Dims& dims,
                                            const SystemState& state,
                                            const std::vector<Oracle>& f1,
                                            const PenaltyConfig& pcfg);

}  // namespace dtzo
