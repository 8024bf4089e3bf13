#include "dtzo/cuts.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dtzo {

double QuadraticCut::eval(const Vec& v) const {
  require_size(v, a.size(), "QuadraticCut::eval");
  double s = e;
  for (std::size_t k = 0; k < v.size(); ++k)
    s += a[k] * v[k] * v[k] + b[k] * v[k];
  return s;
}

const QuadraticCut& CutPool::add(QuadraticCut cut) {
  cut.id = next_id++;
  auto& list = (cut.layer == CutLayer::inner) ? inner : outer;
  list.push_back(std::move(cut));
  return list.back();
}

std::vector<long> CutPool::prune_inactive(const Vec& v_inner,
                                          const Vec& v_outer) {
  std::vector<long> removed;
  auto sweep = [&removed](std::vector<QuadraticCut>& list, const Vec& v) {
    std::erase_if(list, [&](const QuadraticCut& c) {
      if (c.eval(v) < c.slack) {
        removed.push_back(c.id);
        return true;
      }
      return false;
    });
  };
  sweep(inner, v_inner);
  sweep(outer, v_outer);
  return removed;
}

double inner_poly_dim(const Dims& dims) {
  double s = dims.d1 + dims.d2 + (dims.n_workers + 1) * dims.d3 + 3;
  return s * s * s;
}

double outer_poly_dim(const Dims& dims) {
  double s = dims.d1 + (dims.n_workers + 1) * (dims.d2 + dims.d3) + 3;
  return s * s * s;
}

QuadraticCut build_cut_from_linearization(double phi_val, const Vec& g,
                                          const Vec& v_t, double L, double mu,
                                          double poly_dim, double eps,
                                          CutLayer layer, long birth_t) {
  require_size(g, v_t.size(), "build_cut_from_linearization g");
  if (!(L > 0.0)) throw std::invalid_argument("build_cut: L must be > 0");

  const double c = (L + 1.0) / 2.0;
  const double m = mu * mu * L * L * poly_dim / 8.0;

  QuadraticCut cut;
  cut.layer = layer;
  cut.birth_t = birth_t;
  cut.slack = eps;
  cut.a.assign(v_t.size(), -c);
  cut.b.resize(v_t.size());
  for (std::size_t k = 0; k < v_t.size(); ++k)
    cut.b[k] = g[k] + 2.0 * c * v_t[k];
  cut.e = phi_val - dot(g, v_t) - c * norm_sq(v_t) - m;
  return cut;
}

namespace {

CutGenResult generate_cut(const Vec& v_t, const ScalarFn& phi,
                          const SmoothingConfig& cfg, double poly_dim,
                          double eps, CutLayer layer, RngStream& stream,
                          long birth_t) {
  GradEstimate est = multi_point_estimate(phi, v_t, cfg, stream);
  CutGenResult out;
  out.phi_val = est.base;
  out.grad_std_err = std::move(est.std_err);
  out.cut = build_cut_from_linearization(est.base, est.g, v_t, cfg.lipschitz,
                                         cfg.mu, poly_dim, eps, layer, birth_t);
  return out;
}

}  // namespace

CutGenResult generate_inner_cut(const Dims& dims, const SystemState& state,
                                const ScalarFn& phi_in,
                                const SmoothingConfig& cfg, double eps_in,
                                RngStream& stream, long birth_t) {
  // z2' is instantiated with the master's current z2 at generation time.
  Vec v_t = flatten_inner(dims, state, state.z2);
  return generate_cut(v_t, phi_in, cfg, inner_poly_dim(dims), eps_in,
                      CutLayer::inner, stream, birth_t);
}

CutGenResult generate_outer_cut(const Dims& dims, const SystemState& state,
                                const ScalarFn& phi_out,
                                const SmoothingConfig& cfg, double eps_out,
                                RngStream& stream, long birth_t) {
  Vec v_t = flatten_outer(dims, state);
  return generate_cut(v_t, phi_out, cfg, outer_poly_dim(dims), eps_out,
                      CutLayer::outer, stream, birth_t);
}

QuadraticCut generate_rho_cut(CutLayer layer, double phi_val,
                              const Vec& grad_phi, const Vec& v_t, double rho,
                              const std::vector<double>& block_bounds,
                              double eps) {
  require_size(grad_phi, v_t.size(), "generate_rho_cut grad");
  if (!(rho > 0.0)) throw std::invalid_argument("rho-cut: rho must be > 0");

  double bound_sum = 0.0;
  for (double b : block_bounds) bound_sum += b;

  QuadraticCut cut;
  cut.layer = layer;
  cut.slack = eps;
  cut.a.assign(v_t.size(), 0.0);
  cut.b = grad_phi;
  cut.e = phi_val - dot(grad_phi, v_t) - rho * (bound_sum + norm_sq(v_t));
  return cut;
}

namespace {

void write_cut(std::ostream& os, const QuadraticCut& c) {
  os << (c.layer == CutLayer::inner ? "inner" : "outer") << ' ' << c.id << ' '
     << c.birth_t << ' ';
  os.precision(17);
  os << c.slack << ' ' << c.a.size();
  for (double x : c.a) os << ' ' << x;
  for (double x : c.b) os << ' ' << x;
  os << ' ' << c.e << '\n';
}

}  // namespace

void write_cut_pool(std::ostream& os, const CutPool& pool) {
  for (const auto& c : pool.inner) write_cut(os, c);
  for (const auto& c : pool.outer) write_cut(os, c);
}

CutPool read_cut_pool(std::istream& is) {
  CutPool pool;
  std::string layer;
  while (is >> layer) {
    QuadraticCut c;
    if (layer == "inner")
      c.layer = CutLayer::inner;
    else if (layer == "outer")
      c.layer = CutLayer::outer;
    else
      throw std::runtime_error("cut pool parse: bad layer '" + layer + "'");
    std::size_t dim = 0;
    if (!(is >> c.id >> c.birth_t >> c.slack >> dim))
      throw std::runtime_error("cut pool parse: truncated header");
    c.a.resize(dim);
    c.b.resize(dim);
    for (auto& x : c.a) is >> x;
    for (auto& x : c.b) is >> x;
    if (!(is >> c.e)) throw std::runtime_error("cut pool parse: truncated cut");
    auto& list = (c.layer == CutLayer::inner) ? pool.inner : pool.outer;
    pool.next_id = std::max(pool.next_id, c.id + 1);
    list.push_back(std::move(c));
  }
  return pool;
}

std::string to_string(const CutPool& pool) {
  std::ostringstream os;
  write_cut_pool(os, pool);
  return os.str();
}

CutPool cut_pool_from_string(const std::string& text) {
  std::istringstream is(text);
  return read_cut_pool(is);
}

}  // namespace dtzo
