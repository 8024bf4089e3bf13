#include "dtzo/layout.hpp"

#include <algorithm>
#include <stdexcept>

namespace dtzo {

namespace {

void copy_into(Vec& dst, int off, const Vec& src) {
  std::copy(src.begin(), src.end(), dst.begin() + off);
}

Vec slice(const Vec& v, int off, int len) {
  return Vec(v.begin() + off, v.begin() + off + len);
}

}  // namespace

Vec flatten_inner(const Dims& dims, const std::vector<Vec>& x3, const Vec& z1,
                  const Vec& z2_prime, const Vec& z3) {
  dims.validate();
  if (x3.size() != static_cast<std::size_t>(dims.n_workers))
    throw std::invalid_argument("flatten_inner: worker count mismatch");
  for (const auto& b : x3) require_size(b, dims.d3, "flatten_inner x3");
  require_size(z1, dims.d1, "flatten_inner z1");
  require_size(z2_prime, dims.d2, "flatten_inner z2'");
  require_size(z3, dims.d3, "flatten_inner z3");

  InnerLayout L{dims};
  Vec v(L.dim());
  for (int j = 0; j < dims.n_workers; ++j) copy_into(v, L.x3_off(j), x3[j]);
  copy_into(v, L.z1_off(), z1);
  copy_into(v, L.z2_off(), z2_prime);
  copy_into(v, L.z3_off(), z3);
  return v;
}

Vec flatten_inner(const Dims& dims, const SystemState& s, const Vec& z2_prime) {
  return flatten_inner(dims, s.x3, s.z1, z2_prime, s.z3);
}

void unflatten_inner(const Dims& dims, const Vec& v, std::vector<Vec>& x3,
                     Vec& z1, Vec& z2_prime, Vec& z3) {
  InnerLayout L{dims};
  require_size(v, L.dim(), "unflatten_inner");
  x3.resize(dims.n_workers);
  for (int j = 0; j < dims.n_workers; ++j)
    x3[j] = slice(v, L.x3_off(j), dims.d3);
  z1 = slice(v, L.z1_off(), dims.d1);
  z2_prime = slice(v, L.z2_off(), dims.d2);
  z3 = slice(v, L.z3_off(), dims.d3);
}

Vec flatten_outer(const Dims& dims, const std::vector<Vec>& x2,
                  const std::vector<Vec>& x3, const Vec& z1, const Vec& z2,
                  const Vec& z3) {
  dims.validate();
  if (x2.size() != static_cast<std::size_t>(dims.n_workers) ||
      x3.size() != static_cast<std::size_t>(dims.n_workers))
    throw std::invalid_argument("flatten_outer: worker count mismatch");
  for (const auto& b : x2) require_size(b, dims.d2, "flatten_outer x2");
  for (const auto& b : x3) require_size(b, dims.d3, "flatten_outer x3");
  require_size(z1, dims.d1, "flatten_outer z1");
  require_size(z2, dims.d2, "flatten_outer z2");
  require_size(z3, dims.d3, "flatten_outer z3");

  OuterLayout L{dims};
  Vec v(L.dim());
  for (int j = 0; j < dims.n_workers; ++j) {
    copy_into(v, L.x2_off(j), x2[j]);
    copy_into(v, L.x3_off(j), x3[j]);
  }
  copy_into(v, L.z1_off(), z1);
  copy_into(v, L.z2_off(), z2);
  copy_into(v, L.z3_off(), z3);
  return v;
}

Vec flatten_outer(const Dims& dims, const SystemState& s) {
  return flatten_outer(dims, s.x2, s.x3, s.z1, s.z2, s.z3);
}

void unflatten_outer(const Dims& dims, const Vec& v, std::vector<Vec>& x2,
                     std::vector<Vec>& x3, Vec& z1, Vec& z2, Vec& z3) {
  OuterLayout L{dims};
  require_size(v, L.dim(), "unflatten_outer");
  x2.resize(dims.n_workers);
  x3.resize(dims.n_workers);
  for (int j = 0; j < dims.n_workers; ++j) {
    x2[j] = slice(v, L.x2_off(j), dims.d2);
    x3[j] = slice(v, L.x3_off(j), dims.d3);
  }
  z1 = slice(v, L.z1_off(), dims.d1);
  z2 = slice(v, L.z2_off(), dims.d2);
  z3 = slice(v, L.z3_off(), dims.d3);
}

}  // namespace dtzo
