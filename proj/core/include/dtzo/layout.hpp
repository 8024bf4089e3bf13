#pragma once

#include "dtzo/types.hpp"

namespace dtzo {

// Canonical coordinate orders of the two cut spaces.
//   inner: [x3_1, ..., x3_N, z1, z2', z3]
//   outer: [x2_1, ..., x2_N, x3_1, ..., x3_N, z1, z2, z3]
// Cuts, penalty gradients and phi estimators all rely on these offsets.

struct InnerLayout {
  Dims dims;
  int x3_off(int j) const { return j * dims.d3; }
  int z1_off() const { return dims.n_workers * dims.d3; }
  int z2_off() const { return z1_off() + dims.d1; }
  int z3_off() const { return z2_off() + dims.d2; }
  int dim() const { return dims.inner_cut_dim(); }
};

struct OuterLayout {
  Dims dims;
  int x2_off(int j) const { return j * dims.d2; }
  int x3_off(int j) const { return dims.n_workers * dims.d2 + j * dims.d3; }
  int z1_off() const { return dims.n_workers * (dims.d2 + dims.d3); }
  int z2_off() const { return z1_off() + dims.d1; }
  int z3_off() const { return z2_off() + dims.d2; }
  int dim() const { return dims.outer_cut_dim(); }
};

Vec flatten_inner(const Dims& dims, const std::vector<Vec>& x3, const Vec& z1,
                  const Vec& z2_prime, const Vec& z3);
Vec flatten_inner(const Dims& dims, const SystemState& s, const Vec& z2_prime);

void unflatten_inner(const Dims& dims, const Vec& v, std::vector<Vec>& x3,
                     Vec& z1, Vec& z2_prime, Vec& z3);

Vec flatten_outer(const Dims& dims, const std::vector<Vec>& x2,
                  const std::vector<Vec>& x3, const Vec& z1, const Vec& z2,
                  const Vec& z3);
Vec flatten_outer(const Dims& dims, const SystemState& s);

void unflatten_outer(const Dims& dims, const Vec& v, std::vector<Vec>& x2,
                     std::vector<Vec>& x3, Vec& z1, Vec& z2, Vec& z3);

}  // namespace dtzo
