#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dtzo/baselines.hpp"
#include "dtzo/config_io.hpp"
#include "dtzo/diagnostics.hpp"
#include "dtzo/problems.hpp"
#include "dtzo/runtime.hpp"
#include "dtzo/sweep.hpp"

namespace {

using namespace dtzo;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

struct CommonOpts {
  std::uint64_t seed = 0;
  int workers = 2;
  std::string out;
  bool quadratic = false;
  bool robust = false;
  std::string baseline = "none";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--seed", o.seed, "run seed");
  cmd->add_option("--workers", o.workers, "number of workers")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "CSV output path");
  auto* q = cmd->add_flag("--quadratic", o.quadratic,
                          "closed-form quadratic instance");
  cmd->add_flag("--robust-ho", o.robust,
                "robust hyperparameter optimization instance (default)")
      ->excludes(q);
}

SweepRow report_to_row(const RunReport& report, const std::string& method,
                       std::uint64_t seed) {
  SweepRow row;
  row.method = method;
  row.seed = seed;
  row.final_F = report.final_F;
  row.t_eps = report.t_eps;
  row.up_scalars = report.ledger.up_scalars;
  row.down_scalars = report.ledger.down_scalars;
  row.wall_ms = report.wall_ms;
  return row;
}

int cmd_run(const CommonOpts& o, const std::string& config_path) {
  RunReport report;
  SweepRow row;

  if (o.baseline != "none") {
    if (o.quadratic) {
      std::cerr << "baselines target the robust-HO instance\n";
      return 1;
    }
    RobustHOInstance inst = gen_robust_ho(o.workers, o.seed);
    BaselineConfig bcfg;
    bcfg.seed = o.seed;
    BaselineKind kind = o.baseline == "single"
                            ? BaselineKind::single_level_zo
                            : BaselineKind::bilevel_zo;
    report = run_baseline(kind, inst, bcfg);
    row = report_to_row(report, o.baseline, o.seed);
    row.metrics = evaluate_metric(report.final_state.z2, inst);
  } else if (o.quadratic) {
    Dims dims{1, 1, 1, o.workers};
    RunConfig cfg = config_path.empty() ? RunConfig::defaults(dims)
                                        : run_config_from_file(config_path);
    cfg = adapt_config(cfg, Dims{cfg.dims.d1, cfg.dims.d2, cfg.dims.d3,
                                 o.workers});
    cfg.seed = o.seed;
    cfg.use_exact_phi = true;
    QuadraticInstance inst = gen_quadratic(cfg.dims, o.seed);
    report = run_algorithm(inst.to_problem(), cfg);
    row = report_to_row(report, "dtzo", o.seed);
  } else {
    RobustHOInstance inst = gen_robust_ho(o.workers, o.seed);
    RunConfig cfg = config_path.empty() ? RunConfig::defaults(inst.dims)
                                        : run_config_from_file(config_path);
    cfg = adapt_config(cfg, inst.dims);
    cfg.seed = o.seed;
    report = run_algorithm(inst.to_problem(), cfg);
    row = report_to_row(report, "dtzo", o.seed);
    row.metrics = evaluate_metric(report.final_state.z2, inst);
  }

  std::cout << report.to_text();
  if (row.metrics)
    std::cout << "clean_acc " << row.metrics->clean_acc << "\nadv_acc "
              << row.metrics->adv_acc << "\navg " << row.metrics->avg << '\n';
  if (!o.out.empty())
    write_file(o.out, sweep_csv_header() + "\n" + to_csv_row(row) + "\n");
  return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& param,
              std::vector<double> values, int num_seeds, long t_max) {
  SweepSpec spec;
  spec.param = param == "mu" ? SweepParam::mu : SweepParam::t1;
  spec.values = std::move(values);
  for (int s = 0; s < num_seeds; ++s) spec.seeds.push_back(o.seed + s);
  spec.quadratic = o.quadratic;
  spec.instance_seed = o.seed + 1000003;

  Dims dims =
      o.quadratic ? Dims{1, 1, 1, o.workers} : Dims{1, 11, 10, o.workers};
  RunConfig base = RunConfig::defaults(dims);
  base.t_max = t_max;
  base.t1 = 0;
  base.cadence = 5;
  if (o.quadratic) base.use_exact_phi = true;

  auto rows = run_sweep(spec, base);
  std::string csv = to_csv(rows);
  std::cout << csv;
  if (!o.out.empty()) write_file(o.out, csv);
  return 0;
}

int cmd_containment(const CommonOpts& o, int trials, int batch,
                    const std::string& layer) {
  Dims dims{1, 1, 1, o.workers};
  QuadraticInstance inst = gen_quadratic(dims, o.seed);
  SmoothingConfig sm;
  sm.mu = 1e-3;
  sm.lipschitz = 4.0;

  std::string csv = ContainmentReport::csv_header() + "\n";
  for (auto [name, lyr] : {std::pair{"inner", CutLayer::inner},
                           std::pair{"outer", CutLayer::outer}}) {
    if (layer != "both" && layer != name) continue;
    RngStream stream(o.seed, StreamRole::test, 0, purpose::generic);
    ContainmentReport rep =
        test_containment(inst, lyr, trials, batch, sm, stream);
    rep.seed = o.seed;
    std::cout << name << ": " << rep.n_satisfied << "/" << rep.n_cuts
              << " satisfied, worst violation " << rep.worst_violation
              << ", mean excess " << rep.mean_excess << '\n';
    csv += rep.to_csv_row() + "\n";
  }
  if (!o.out.empty()) write_file(o.out, csv);
  return 0;
}

int cmd_bench_comm(const CommonOpts& o, long t_max, long t1, long cadence) {
  Dims dims{3, 2, 1, o.workers};
  RunConfig cfg = RunConfig::defaults(dims);
  cfg.t_max = t_max;
  cfg.t1 = t1;
  cfg.cadence = cadence;
  cfg.seed = o.seed;
  cfg.use_exact_phi = true;

  QuadraticInstance inst = gen_quadratic(dims, o.seed);
  RunReport report = run_algorithm(inst.to_problem(), cfg);
  ExpectedComm want = expected_comm(cfg, report.t_reached);

  long iter_total = report.ledger.iter_up + report.ledger.iter_down;
  long cut_total = report.ledger.cut_up + report.ledger.cut_down;
  std::cout << "iterations " << report.t_reached << '\n'
            << "ledger  c1=" << iter_total << " c2=" << cut_total
            << " total=" << (iter_total + cut_total) << '\n'
            << "predicted c1=" << want.c1 << " c2=" << want.c2
            << " total=" << want.total() << '\n'
            << (iter_total == want.c1 && cut_total == want.c2 ? "match"
                                                              : "MISMATCH")
            << '\n';
  return iter_total == want.c1 && cut_total == want.c2 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"distributed trilevel zeroth-order learning"};
  app.require_subcommand(1);

  CommonOpts run_o, sweep_o, cont_o, bench_o;
  std::string config_path, param = "t1", layer = "both";
  std::vector<double> values;
  int num_seeds = 5, trials = 100, batch = 256;
  long t_max = 200, bench_t_max = 10, bench_t1 = 4, bench_cadence = 2;

  auto* run = app.add_subcommand("run", "single experiment");
  add_common(run, run_o);
  run->add_option("--config", config_path, "JSON run configuration")
      ->check(CLI::ExistingFile);
  run->add_option("--baseline", run_o.baseline, "none|single|bilevel")
      ->check(CLI::IsMember({"none", "single", "bilevel"}));

  auto* sweep = app.add_subcommand("sweep", "parameter sweep");
  add_common(sweep, sweep_o);
  sweep->add_option("--param", param, "t1|mu")
      ->check(CLI::IsMember({"t1", "mu"}));
  sweep->add_option("--values", values, "sweep values")->required();
  sweep->add_option("--num-seeds", num_seeds, "seeds per value")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--t-max", t_max, "iterations per run");

  auto* cont = app.add_subcommand("containment", "cut containment harness");
  add_common(cont, cont_o);
  cont->add_option("--trials", trials, "cuts per layer");
  cont->add_option("--batch", batch, "perturbation batch");
  cont->add_option("--layer", layer, "inner|outer|both")
      ->check(CLI::IsMember({"inner", "outer", "both"}));

  auto* bench = app.add_subcommand("bench-comm", "ledger vs predicted totals");
  add_common(bench, bench_o);
  bench->add_option("--t-max", bench_t_max, "iterations");
  bench->add_option("--t1", bench_t1, "cut-refresh horizon");
  bench->add_option("--cadence", bench_cadence, "refresh cadence");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_o, config_path);
    if (sweep->parsed())
      return cmd_sweep(sweep_o, param, values, num_seeds, t_max);
    if (cont->parsed()) return cmd_containment(cont_o, trials, batch, layer);
    if (bench->parsed())
      return cmd_bench_comm(bench_o, bench_t_max, bench_t1, bench_cadence);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
