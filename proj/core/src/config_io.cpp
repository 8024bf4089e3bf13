#include "dtzo/config_io.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace dtzo {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key()))
      throw std::runtime_error("config: unknown key '" + it.key() + "' in " +
                               where);
}

Vec vec_field(const json& obj, const char* key, const Vec& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (v.is_number()) return Vec(fallback.size(), v.get<double>());
  return v.get<Vec>();
}

}  // namespace

RunConfig run_config_from_json_text(const std::string& text) {
  json root = json::parse(text);
  reject_unknown(root,
                 {"dims", "smoothing", "penalty", "steps", "t1", "cadence",
                  "phi", "t_max", "eps_stop", "seed", "cut_batch",
                  "gap_check_every", "greybox_level1", "use_exact_phi",
                  "prune", "gen_inner", "gen_outer", "deterministic_timing"},
                 "root");

  Dims dims;
  if (root.contains("dims")) {
    const json& d = root.at("dims");
    reject_unknown(d, {"d1", "d2", "d3", "workers"}, "dims");
    dims.d1 = d.value("d1", 1);
    dims.d2 = d.value("d2", 1);
    dims.d3 = d.value("d3", 1);
    dims.n_workers = d.value("workers", 1);
  }
  RunConfig cfg = RunConfig::defaults(dims);

  if (root.contains("smoothing")) {
    const json& s = root.at("smoothing");
    reject_unknown(s, {"mu", "batch", "lipschitz"}, "smoothing");
    cfg.smoothing.mu = s.value("mu", cfg.smoothing.mu);
    cfg.smoothing.batch = s.value("batch", cfg.smoothing.batch);
    cfg.smoothing.lipschitz = s.value("lipschitz", cfg.smoothing.lipschitz);
  }
  if (root.contains("penalty")) {
    const json& p = root.at("penalty");
    reject_unknown(p, {"lambda", "phi", "eps_in", "eps_out"}, "penalty");
    cfg.penalty.lambda = p.value("lambda", cfg.penalty.lambda);
    cfg.penalty.phi_j = vec_field(p, "phi", cfg.penalty.phi_j);
    cfg.penalty.eps_in = p.value("eps_in", cfg.penalty.eps_in);
    cfg.penalty.eps_out = p.value("eps_out", cfg.penalty.eps_out);
  }
  if (root.contains("steps")) {
    const json& s = root.at("steps");
    if (s.is_string()) {
      if (s.get<std::string>() != "auto")
        throw std::runtime_error("config: steps must be \"auto\" or object");
    } else {
      reject_unknown(s, {"x1", "x2", "x3", "z1", "z2", "z3"}, "steps");
      StepSizes st;
      st.x1 = s.at("x1").get<double>();
      st.x2 = s.at("x2").get<double>();
      st.x3 = s.at("x3").get<double>();
      st.z1 = s.at("z1").get<double>();
      st.z2 = s.at("z2").get<double>();
      st.z3 = s.at("z3").get<double>();
      cfg.steps = st;
    }
  }
  if (root.contains("phi")) {
    const json& p = root.at("phi");
    reject_unknown(p,
                   {"rounds", "eta_x", "eta_z", "gamma", "varphi",
                    "cut_penalty", "mu"},
                   "phi");
    cfg.phi.rounds = p.value("rounds", cfg.phi.rounds);
    cfg.phi.eta_x = p.value("eta_x", cfg.phi.eta_x);
    cfg.phi.eta_z = p.value("eta_z", cfg.phi.eta_z);
    cfg.phi.gamma = vec_field(p, "gamma", cfg.phi.gamma);
    cfg.phi.varphi = vec_field(p, "varphi", cfg.phi.varphi);
    cfg.phi.cut_penalty = p.value("cut_penalty", cfg.phi.cut_penalty);
    cfg.phi.smoothing.mu = p.value("mu", cfg.phi.smoothing.mu);
  }
  cfg.t1 = root.value("t1", cfg.t1);
  cfg.cadence = root.value("cadence", cfg.cadence);
  cfg.t_max = root.value("t_max", cfg.t_max);
  cfg.eps_stop = root.value("eps_stop", cfg.eps_stop);
  cfg.seed = root.value("seed", cfg.seed);
  cfg.cut_batch = root.value("cut_batch", cfg.cut_batch);
  cfg.gap_check_every = root.value("gap_check_every", cfg.gap_check_every);
  cfg.greybox_level1 = root.value("greybox_level1", cfg.greybox_level1);
  cfg.use_exact_phi = root.value("use_exact_phi", cfg.use_exact_phi);
  cfg.prune = root.value("prune", cfg.prune);
  cfg.gen_inner = root.value("gen_inner", cfg.gen_inner);
  cfg.gen_outer = root.value("gen_outer", cfg.gen_outer);
  cfg.deterministic_timing =
      root.value("deterministic_timing", cfg.deterministic_timing);

  cfg.validate();
  return cfg;
}

RunConfig run_config_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return run_config_from_json_text(text);
}

std::string run_config_to_json_text(const RunConfig& cfg) {
  json root;
  root["dims"] = {{"d1", cfg.dims.d1},
                  {"d2", cfg.dims.d2},
                  {"d3", cfg.dims.d3},
                  {"workers", cfg.dims.n_workers}};
  root["smoothing"] = {{"mu", cfg.smoothing.mu},
                       {"batch", cfg.smoothing.batch},
                       {"lipschitz", cfg.smoothing.lipschitz}};
  root["penalty"] = {{"lambda", cfg.penalty.lambda},
                     {"phi", cfg.penalty.phi_j},
                     {"eps_in", cfg.penalty.eps_in},
                     {"eps_out", cfg.penalty.eps_out}};
  if (cfg.steps)
    root["steps"] = {{"x1", cfg.steps->x1}, {"x2", cfg.steps->x2},
                     {"x3", cfg.steps->x3}, {"z1", cfg.steps->z1},
                     {"z2", cfg.steps->z2}, {"z3", cfg.steps->z3}};
  else
    root["steps"] = "auto";
  root["phi"] = {{"rounds", cfg.phi.rounds},   {"eta_x", cfg.phi.eta_x},
                 {"eta_z", cfg.phi.eta_z},     {"gamma", cfg.phi.gamma},
                 {"varphi", cfg.phi.varphi},   {"cut_penalty", cfg.phi.cut_penalty},
                 {"mu", cfg.phi.smoothing.mu}};
  root["t1"] = cfg.t1;
  root["cadence"] = cfg.cadence;
  root["t_max"] = cfg.t_max;
  root["eps_stop"] = cfg.eps_stop;
  root["seed"] = cfg.seed;
  root["cut_batch"] = cfg.cut_batch;
  root["gap_check_every"] = cfg.gap_check_every;
  root["greybox_level1"] = cfg.greybox_level1;
  root["use_exact_phi"] = cfg.use_exact_phi;
  root["prune"] = cfg.prune;
  root["gen_inner"] = cfg.gen_inner;
  root["gen_outer"] = cfg.gen_outer;
  root["deterministic_timing"] = cfg.deterministic_timing;
  return root.dump(2);
}

}  // namespace dtzo
