#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dtzo/layout.hpp"
#include "dtzo/types.hpp"
#include "dtzo/zo_grad.hpp"

namespace dtzo {

enum class CutLayer { inner, outer };

/// One quadratic cut h(v) = a.(v*v) + b.v + e over its layer's cut space;
/// the feasibility test is h(v) <= slack. Zeroth-order cuts have every
/// a_k = -(L+1)/2; rho-cuts have a = 0.
struct QuadraticCut {
  CutLayer layer = CutLayer::inner;
  Vec a, b;
  double e = 0.0;
  double slack = 0.0;  // eps_in or eps_out, stored per cut
  long birth_t = 0;
  long id = 0;

  double eval(const Vec& v) const;
};

struct CutPool {
  std::vector<QuadraticCut> inner;
  std::vector<QuadraticCut> outer;
  long next_id = 0;

  const QuadraticCut& add(QuadraticCut cut);
  std::size_t size() const { return inner.size() + outer.size(); }

  /// Removes exactly the cuts with eval(v) < slack (strict) at the given
  /// evaluation points; returns the removed ids.
  std::vector<long> prune_inactive(const Vec& v_inner, const Vec& v_outer);
};

/// Polynomial-degree constants entering the smoothing bias margin of the
/// cut constructions.
double inner_poly_dim(const Dims& dims);  // (d1 + d2 + (N+1) d3 + 3)^3
double outer_poly_dim(const Dims& dims);  // (d1 + (N+1)(d2 + d3) + 3)^3

/// Expands the linearization inequality
///   phi_val + g.(v - v_t) <= ((L+1)/2) ||v - v_t||^2 + mu^2 L^2 poly_dim/8 + eps
/// into coordinate-wise quadratic form. With c = (L+1)/2 and
/// m = mu^2 L^2 poly_dim / 8:
///   a_k = -c,  b_k = g_k + 2 c v_t[k],  e = phi_val - g.v_t - c||v_t||^2 - m,
/// so h(v_t) = phi_val - m.
QuadraticCut build_cut_from_linearization(double phi_val, const Vec& g,
                                          const Vec& v_t, double L, double mu,
                                          double poly_dim, double eps,
                                          CutLayer layer, long birth_t = 0);

struct CutGenResult {
  QuadraticCut cut;
  double phi_val = 0.0;
  Vec grad_std_err;  // per-coordinate standard error of the smoothing gradient
};

/// Generates a new inner-layer zeroth-order cut at the current iterate.
/// phi_in must be deterministic under common random numbers; the cut's
/// linear term averages cfg.batch two-point perturbation directions.
CutGenResult generate_inner_cut(const Dims& dims, const SystemState& state,
                                const ScalarFn& phi_in,
                                const SmoothingConfig& cfg, double eps_in,
                                RngStream& stream, long birth_t = 0);

CutGenResult generate_outer_cut(const Dims& dims, const SystemState& state,
                                const ScalarFn& phi_out,
                                const SmoothingConfig& cfg, double eps_out,
                                RngStream& stream, long birth_t = 0);

/// First-order rho-cut (grey-box mode): a = 0, b = grad_phi,
/// e = phi_val - grad_phi.v_t - rho*(sum(bounds) + ||v_t||^2).
QuadraticCut generate_rho_cut(CutLayer layer, double phi_val,
                              const Vec& grad_phi, const Vec& v_t, double rho,
                              const std::vector<double>& block_bounds,
                              double eps);

// Line-oriented text serialization for checkpointing and inspection:
// one cut per line: layer id birth_t eps a... b... e
void write_cut_pool(std::ostream& os, const CutPool& pool);
CutPool read_cut_pool(std::istream& is);
std::string to_string(const CutPool& pool);
CutPool cut_pool_from_string(const std::string& text);

}  // namespace dtzo
