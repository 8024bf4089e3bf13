#pragma once

#include <cstdint>

#include "dtzo/phi.hpp"
#include "dtzo/rng.hpp"
#include "dtzo/types.hpp"

namespace dtzo {

// --------------------------------------------------- closed-form quadratic

/// Coordinate-wise diagonal quadratics at every level, with each level's
/// target affine in the levels above:
///   f1_j(x1)          = sum_k q1[j][k] (x1[k] - t1[j][k])^2
///   f2_j(z1, x2)      = sum_k q2[j][k] (x2[k] - t2_j(z1)[k])^2
///   f3_j(z1, z2, x3)  = sum_k q3[j][k] (x3[k] - t3_j(z1, z2)[k])^2
/// with t2_j(z1) = t2_0[j] + A[j] z1 and t3_j = t3_0[j] + B[j] z1 + C[j] z2.
/// The induced trilevel solution is a chain of weighted means, stored at
/// construction and self-checked against first-order conditions.
struct QuadraticInstance {
  Dims dims;
  std::vector<Vec> q1, t1;
  std::vector<Vec> q2, t2_0;
  std::vector<std::vector<Vec>> A;  // per worker, d2 rows of length d1
  std::vector<Vec> q3, t3_0;
  std::vector<std::vector<Vec>> B;  // d3 x d1
  std::vector<std::vector<Vec>> C;  // d3 x d2
  Vec z1_star, z2_star, z3_star;    // closed-form trilevel solution
  PhiConfig phi;                    // dynamics behind the exact residuals

  Vec t2_of(int j, const Vec& z1) const;
  Vec t3_of(int j, const Vec& z1, const Vec& z2) const;

  /// Exact residuals: squared distance of the point's (x, z) blocks to
  /// the closed-form fixed point of the consensus dynamics at the point's
  /// upper-level coordinates (back-substitution, no iteration). The
  /// K-step estimators converge to these as K grows.
  double exact_phi_in(const Vec& v) const;
  double exact_phi_out(const Vec& v) const;  // ignores inner-cut coupling

  /// Exact fixed points of the respective dynamics (residual = 0 there).
  Vec feasible_inner_point(const Vec& z1, const Vec& z2) const;
  Vec feasible_outer_point(const Vec& z1) const;

  Problem to_problem() const;  // gradient-capable oracles + exact residuals
};

/// Random well-conditioned instance (diagonal entries in [0.5, 1.5]).
/// For dims with every d_i <= 2 a brute-force grid search over [-2, 2]
/// cross-checks the stored solution at construction.
QuadraticInstance gen_quadratic(const Dims& dims, std::uint64_t seed);

// ----------------------------------------------- robust hyperparameter opt

enum class ModelKind { logistic, mlp };  // mlp: one hidden layer, width 8,
                                         // ReLU (non-differentiable option)

struct Dataset {
  std::vector<Vec> X;
  std::vector<int> y;  // in {0, 1}
};

/// Trilevel robust hyperparameter optimization on synthetic blobs:
///   level 1: clean validation loss of the trained weights
///   level 2: regularized adversarial training loss over weights
///   level 3: training-loss maximization over a per-worker perturbation
///            (implemented as minimization of the negated loss)
/// The shared perturbation variable x3 (dim = feature dim) is mapped to a
/// bounded perturbation radius*tanh(x3) applied to every training row.
/// The regularizer is lambda(u) = 0.1 * softplus(u[0]) with u = the
/// level-1 variable (d1 = 1).
struct RobustHOInstance {
  Dims dims;  // d1 = 1, d2 = weight count, d3 = feature dim
  ModelKind model = ModelKind::logistic;
  std::vector<Dataset> train, val;  // per worker, standardized features
  double radius = 0.05;
  std::uint64_t seed = 0;

  double lambda_of(const Vec& u) const;
  Vec perturbation(const Vec& x3) const;  // radius * tanh, coordinate-wise

  /// Mean loss of the model on (X, y); perturb added to every row when
  /// non-null.
  double loss(const Vec& w, const Dataset& data, const Vec* perturb) const;
  bool predict_correct(const Vec& w, const Vec& x, int y) const;
  Vec input_gradient(const Vec& w, const Vec& x, int y) const;

  Problem to_problem() const;  // black-box oracles, no exact residuals
};

RobustHOInstance gen_robust_ho(int n_workers, std::uint64_t seed,
                               ModelKind model = ModelKind::logistic);

struct Metrics {
  double clean_acc = 0.0;
  double adv_acc = 0.0;
  double avg = 0.0;
};

/// Clean and adversarial accuracy of weights w on the pooled validation
/// sets; the attack is 7 steps of signed input-gradient ascent projected
/// onto the radius-0.05 infinity ball (white-box at evaluation time).
Metrics evaluate_metric(const Vec& w, const RobustHOInstance& inst);

}  // namespace dtzo
