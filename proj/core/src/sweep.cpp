#include "dtzo/sweep.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dtzo {

std::string sweep_csv_header() {
  return "method,seed,param,value,clean_acc,adv_acc,avg,final_F,T_eps,"
         "up_scalars,down_scalars,wall_ms";
}

std::string to_csv_row(const SweepRow& row) {
  std::ostringstream os;
  os.precision(17);
  os << row.method << ',' << row.seed << ',' << row.param << ',' << row.value
     << ',';
  if (row.metrics)
    os << row.metrics->clean_acc << ',' << row.metrics->adv_acc << ','
       << row.metrics->avg;
  else
    os << ",,";
  os << ',' << row.final_F << ',';
  if (row.t_eps) os << *row.t_eps;
  os << ',' << row.up_scalars << ',' << row.down_scalars << ','
     << row.wall_ms;
  return os.str();
}

std::string to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << sweep_csv_header() << '\n';
  for (const auto& r : rows) os << to_csv_row(r) << '\n';
  return os.str();
}

RunConfig adapt_config(const RunConfig& base, const Dims& dims) {
  RunConfig cfg = base;
  cfg.dims = dims;
  auto fit = [&](Vec& v, double fallback) {
    double fill = v.empty() ? fallback : v[0];
    v.assign(dims.n_workers, fill);
  };
  fit(cfg.penalty.phi_j, 1.0);
  fit(cfg.phi.gamma, 1.0);
  fit(cfg.phi.varphi, 1.0);
  return cfg;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const RunConfig& base) {
  if (spec.values.empty())
    throw std::invalid_argument("run_sweep: empty value list");
  if (spec.seeds.empty())
    throw std::invalid_argument("run_sweep: empty seed list");

  struct Job {
    double value;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double v : spec.values)
    for (std::uint64_t s : spec.seeds) jobs.push_back({v, s});

  Problem prob;
  std::optional<QuadraticInstance> quad;
  std::optional<RobustHOInstance> robust;
  Dims dims = base.dims;
  if (spec.quadratic) {
    quad = gen_quadratic(base.dims, spec.instance_seed);
    prob = quad->to_problem();
  } else {
    robust = gen_robust_ho(base.dims.n_workers, spec.instance_seed);
    dims = robust->dims;
    prob = robust->to_problem();
  }
  const std::string param_name = spec.param == SweepParam::t1 ? "t1" : "mu";

  std::vector<SweepRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mu;

  auto work = [&]() {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= jobs.size() || failed.load()) return;
      try {
        RunConfig cfg = adapt_config(base, dims);
        cfg.seed = jobs[i].seed;
        if (spec.param == SweepParam::t1)
          cfg.t1 = std::lround(jobs[i].value);
        else
          cfg.smoothing.mu = jobs[i].value;

        RunReport report = run_algorithm(prob, cfg);

        SweepRow row;
        row.seed = jobs[i].seed;
        row.param = param_name;
        row.value = jobs[i].value;
        row.final_F = report.final_F;
        row.t_eps = report.t_eps;
        row.up_scalars = report.ledger.up_scalars;
        row.down_scalars = report.ledger.down_scalars;
        row.wall_ms = report.wall_ms;
        if (robust)
          row.metrics = evaluate_metric(report.final_state.z2, *robust);
        rows[i] = std::move(row);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mu);
        failed = true;
        error = e.what();
        return;
      }
    }
  };

  int n_threads = std::min<int>(thread_cap(), static_cast<int>(jobs.size()));
  if (n_threads > 1) {
    std::vector<std::thread> threads;
    for (int i = 0; i < n_threads; ++i) threads.emplace_back(work);
    for (auto& th : threads) th.join();
  } else {
    work();
  }
  if (failed) throw std::runtime_error("run_sweep: " + error);
  return rows;
}

}  // namespace dtzo
