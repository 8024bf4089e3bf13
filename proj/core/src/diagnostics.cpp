#include "dtzo/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dtzo {

std::string ContainmentReport::csv_header() {
  return "n_cuts,n_satisfied,worst_violation,mean_excess,seed";
}

std::string ContainmentReport::to_csv_row() const {
  std::ostringstream os;
  os.precision(17);
  os << n_cuts << ',' << n_satisfied << ',' << worst_violation << ','
     << mean_excess << ',' << seed;
  return os.str();
}

ContainmentReport test_containment(const QuadraticInstance& inst,
                                   CutLayer layer, int n_trials, int batch,
                                   const SmoothingConfig& smoothing,
                                   RngStream& stream) {
  if (n_trials < 0)
    throw std::invalid_argument("test_containment: n_trials < 0");
  const Dims& dims = inst.dims;

  ScalarFn phi;
  Vec v_star;
  double poly;
  if (layer == CutLayer::inner) {
    phi = [&inst](const Vec& v) { return inst.exact_phi_in(v); };
    v_star = inst.feasible_inner_point(Vec(dims.d1, 0.0), Vec(dims.d2, 0.0));
    poly = inner_poly_dim(dims);
  } else {
    phi = [&inst](const Vec& v) { return inst.exact_phi_out(v); };
    v_star = inst.feasible_outer_point(Vec(dims.d1, 0.0));
    poly = outer_poly_dim(dims);
  }
  const int dim =
      layer == CutLayer::inner ? dims.inner_cut_dim() : dims.outer_cut_dim();

  SmoothingConfig scfg = smoothing;
  scfg.batch = batch;
  scfg.validate();

  ContainmentReport report;
  report.n_cuts = n_trials;
  double excess_sum = 0.0;
  for (int trial = 0; trial < n_trials; ++trial) {
    Vec v_t(dim);
    for (auto& x : v_t) x = 2.0 * stream.uniform() - 1.0;
    GradEstimate est = multi_point_estimate(phi, v_t, scfg, stream);
    QuadraticCut cut = build_cut_from_linearization(
        est.base, est.g, v_t, scfg.lipschitz, scfg.mu, poly, 0.0, layer);

    double excess = std::max(cut.eval(v_star) - cut.slack, 0.0);
    if (excess == 0.0) ++report.n_satisfied;
    report.worst_violation = std::max(report.worst_violation, excess);
    excess_sum += excess;
  }
  if (n_trials > 0) excess_sum /= static_cast<double>(n_trials);
  report.mean_excess = excess_sum;
  return report;
}

SmoothingCheck test_smoothing_identity(const ScalarFn& f, const Vec& x,
                                       double hessian_trace, double mu, int M,
                                       RngStream& stream) {
  McValue mc = smoothed_value_mc(f, x, mu, M, stream);
  SmoothingCheck out;
  out.estimate = mc.mean;
  out.exact = f(x) + 0.5 * mu * mu * hessian_trace;
  out.std_err = mc.std_err;
  return out;
}

std::optional<std::size_t> detect_T_eps(const std::vector<double>& gap_trace,
                                        double eps) {
  for (std::size_t i = 0; i < gap_trace.size(); ++i)
    if (gap_trace[i] <= eps) return i;
  return std::nullopt;
}

int count_satisfying(const std::vector<QuadraticCut>& cuts,
                     const std::vector<Vec>& probes) {
  int n = 0;
  for (const auto& p : probes) {
    bool ok = true;
    for (const auto& c : cuts)
      if (c.eval(p) > c.slack) {
        ok = false;
        break;
      }
    if (ok) ++n;
  }
  return n;
}

}  // namespace dtzo
