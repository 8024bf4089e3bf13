#include "dtzo/runtime.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dtzo/layout.hpp"
#include "dtzo/zo_grad.hpp"

namespace dtzo {

// ---------------------------------------------------------------- messages

std::size_t scalar_count(const Message& msg) {
  return std::visit(
      [](const auto& m) -> std::size_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, WorkerUpdate>)
          return m.x1.size() + m.x2.size() + m.x3.size();
        else if constexpr (std::is_same_v<T, MasterBroadcast>)
          return m.z1.size() + m.z2.size() + m.z3.size() +
                 m.grad_o_x2.size() + m.grad_o_x3.size();
        else if constexpr (std::is_same_v<T, PhiRoundUp>)
          return m.block.size();
        else if constexpr (std::is_same_v<T, PhiRoundDown>)
          return m.block.size();
        else
          return 0;
      },
      msg);
}

std::uint8_t tag_of(const Message& msg) {
  return std::visit(
      [](const auto& m) -> std::uint8_t {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, WorkerUpdate>)
          return wire::tag_worker_update;
        else if constexpr (std::is_same_v<T, MasterBroadcast>)
          return wire::tag_master_broadcast;
        else if constexpr (std::is_same_v<T, PhiRoundUp>)
          return wire::tag_phi_round_up;
        else if constexpr (std::is_same_v<T, PhiRoundDown>)
          return wire::tag_phi_round_down;
        else
          return wire::tag_shutdown;
      },
      msg);
}

std::vector<std::uint8_t> encode_message(const Message& msg) {
  Vec payload;
  payload.reserve(scalar_count(msg));
  auto append = [&payload](const Vec& v) {
    payload.insert(payload.end(), v.begin(), v.end());
  };
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, WorkerUpdate>) {
          append(m.x1);
          append(m.x2);
          append(m.x3);
        } else if constexpr (std::is_same_v<T, MasterBroadcast>) {
          append(m.z1);
          append(m.z2);
          append(m.z3);
          append(m.grad_o_x2);
          append(m.grad_o_x3);
        } else if constexpr (std::is_same_v<T, PhiRoundUp>) {
          append(m.block);
        } else if constexpr (std::is_same_v<T, PhiRoundDown>) {
          append(m.block);
        }
      },
      msg);
  return wire::encode_frame(tag_of(msg), payload);
}

namespace {

Vec take(const Vec& src, std::size_t& pos, std::size_t n) {
  Vec out(src.begin() + pos, src.begin() + pos + n);
  pos += n;
  return out;
}

}  // namespace

Message decode_message(const Dims& dims, const wire::Frame& frame,
                       int from_worker) {
  const std::size_t d1 = dims.d1, d2 = dims.d2, d3 = dims.d3;
  std::size_t pos = 0;
  switch (frame.tag) {
    case wire::tag_worker_update: {
      require_size(frame.payload, d1 + d2 + d3, "WorkerUpdate payload");
      WorkerUpdate m;
      m.j = from_worker;
      m.x1 = take(frame.payload, pos, d1);
      m.x2 = take(frame.payload, pos, d2);
      m.x3 = take(frame.payload, pos, d3);
      return m;
    }
    case wire::tag_master_broadcast: {
      require_size(frame.payload, d1 + 2 * d2 + 2 * d3,
                   "MasterBroadcast payload");
      MasterBroadcast m;
      m.z1 = take(frame.payload, pos, d1);
      m.z2 = take(frame.payload, pos, d2);
      m.z3 = take(frame.payload, pos, d3);
      m.grad_o_x2 = take(frame.payload, pos, d2);
      m.grad_o_x3 = take(frame.payload, pos, d3);
      return m;
    }
    case wire::tag_phi_round_up: {
      if (frame.payload.size() != d2 && frame.payload.size() != d3)
        throw std::runtime_error("PhiRoundUp payload: bad block length");
      return PhiRoundUp{from_worker, frame.payload};
    }
    case wire::tag_phi_round_down: {
      if (frame.payload.size() != d2 && frame.payload.size() != d3)
        throw std::runtime_error("PhiRoundDown payload: bad block length");
      return PhiRoundDown{frame.payload};
    }
    case wire::tag_shutdown:
      if (!frame.payload.empty())
        throw std::runtime_error("Shutdown payload must be empty");
      return Shutdown{};
    default:
      throw std::runtime_error("decode_message: unknown tag");
  }
}

// --------------------------------------------------------------- transport

void CommLedger::add_up(long n, CommPhase phase) {
  up_scalars += n;
  (phase == CommPhase::iteration ? iter_up : cut_up) += n;
}

void CommLedger::add_down(long n, CommPhase phase) {
  down_scalars += n;
  (phase == CommPhase::iteration ? iter_down : cut_down) += n;
}

LocalTransport::LocalTransport(int n_workers)
    : up_(n_workers), down_(n_workers) {}

void LocalTransport::send_up(int j, Message msg, CommPhase phase) {
  if (!open_) throw std::runtime_error("transport: channel closed");
  ledger_.add_up(static_cast<long>(scalar_count(msg)), phase);
  up_.at(j).push_back(std::move(msg));
}

Message LocalTransport::recv_up(int j) {
  auto& q = up_.at(j);
  if (!open_ || q.empty())
    throw std::runtime_error("transport: recv_up on empty or closed channel");
  Message m = std::move(q.front());
  q.pop_front();
  return m;
}

void LocalTransport::send_down(int j, Message msg, CommPhase phase) {
  if (!open_) throw std::runtime_error("transport: channel closed");
  ledger_.add_down(static_cast<long>(scalar_count(msg)), phase);
  down_.at(j).push_back(std::move(msg));
}

Message LocalTransport::recv_down(int j) {
  auto& q = down_.at(j);
  if (!open_ || q.empty())
    throw std::runtime_error(
        "transport: recv_down on empty or closed channel");
  Message m = std::move(q.front());
  q.pop_front();
  return m;
}

void LocalTransport::close() { open_ = false; }

// ------------------------------------------------------------------ config

void RunConfig::validate() const {
  dims.validate();
  smoothing.validate();
  penalty.validate(dims.n_workers);
  phi.validate(dims.n_workers);
  if (steps) steps->validate();
  if (cadence < 1) throw std::invalid_argument("RunConfig: cadence < 1");
  if (t1 < 0) throw std::invalid_argument("RunConfig: t1 < 0");
  if (t_max < 1) throw std::invalid_argument("RunConfig: t_max < 1");
  if (cut_batch < 1) throw std::invalid_argument("RunConfig: cut_batch < 1");
  if (gap_check_every < 1)
    throw std::invalid_argument("RunConfig: gap_check_every < 1");
}

StepSizes RunConfig::resolve_steps() const {
  if (steps) return *steps;
  long t1_eff = std::min(t1, t_max - 1);
  return default_step_sizes(smoothing.lipschitz, dims, t_max, t1_eff);
}

RunConfig RunConfig::defaults(const Dims& d) {
  RunConfig cfg;
  cfg.dims = d;
  cfg.penalty = PenaltyConfig::defaults(d.n_workers);
  cfg.phi = PhiConfig::defaults(d.n_workers);
  return cfg;
}

ExpectedComm expected_comm(const RunConfig& cfg, long T) {
  if (T < 1) throw std::invalid_argument("expected_comm: T < 1");
  const Dims& d = cfg.dims;
  ExpectedComm out;
  out.c1 = T * (2L * d.d1 + 3L * d.d2 + 3L * d.d3) * d.n_workers;
  long events = cfg.t1 / cfg.cadence;
  long layers = (cfg.gen_inner ? 1 : 0) * d.d3 + (cfg.gen_outer ? 1 : 0) * d.d2;
  out.c2 = 2L * d.n_workers * events * cfg.cadence * cfg.phi.rounds * layers;
  return out;
}

// ------------------------------------------------------------------- steps

WorkerUpdate worker_step(int j, const Vec& x1, const Vec& x2, const Vec& x3,
                         const MasterBroadcast& bc, const Oracle& f1,
                         const PenaltyConfig& pcfg, const SmoothingConfig& sm,
                         const StepSizes& steps, bool greybox,
                         WorkerStreams& streams) {
  Vec g1, g2, g3;
  if (greybox) {
    if (!f1.has_gradient())
      throw std::runtime_error("worker_step: grey-box mode without gradient");
    auto g = f1.gradient(x1, x2, x3);
    g1 = std::move(g[0]);
    g2 = std::move(g[1]);
    g3 = std::move(g[2]);
  } else {
    double base = f1.eval(x1, x2, x3);
    Vec u1 = streams.x1.gaussian_vec(x1.size());
    Vec u2 = streams.x2.gaussian_vec(x2.size());
    Vec u3 = streams.x3.gaussian_vec(x3.size());
    g1 = two_point_estimate_with_base(
        [&](const Vec& v) { return f1.eval(v, x2, x3); }, x1, base, sm.mu, u1);
    g2 = two_point_estimate_with_base(
        [&](const Vec& v) { return f1.eval(x1, v, x3); }, x2, base, sm.mu, u2);
    g3 = two_point_estimate_with_base(
        [&](const Vec& v) { return f1.eval(x1, x2, v); }, x3, base, sm.mu, u3);
  }

  for (std::size_t i = 0; i < x1.size(); ++i)
    g1[i] += 2.0 * pcfg.phi_j[j] * (x1[i] - bc.z1[i]);
  axpy(1.0, bc.grad_o_x2, g2);
  axpy(1.0, bc.grad_o_x3, g3);

  WorkerUpdate upd;
  upd.j = j;
  upd.x1 = x1;
  upd.x2 = x2;
  upd.x3 = x3;
  axpy(-steps.x1, g1, upd.x1);
  axpy(-steps.x2, g2, upd.x2);
  axpy(-steps.x3, g3, upd.x3);
  return upd;
}

void master_step(const Dims& dims, SystemState& state,
                 const std::vector<QuadraticCut>& outer,
                 const PenaltyConfig& pcfg, const StepSizes& steps) {
  OuterGrad og = grad_o(outer, dims, state, pcfg);

  Vec gz1 = og.z1;
  for (int j = 0; j < dims.n_workers; ++j)
    for (int i = 0; i < dims.d1; ++i)
      gz1[i] += 2.0 * pcfg.phi_j[j] * (state.z1[i] - state.x1[j][i]);

  axpy(-steps.z1, gz1, state.z1);
  axpy(-steps.z2, og.z2, state.z2);
  axpy(-steps.z3, og.z3, state.z3);
}

// --------------------------------------------------------------- main loop

int thread_cap() {
  if (const char* env = std::getenv("DTZO_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

namespace {

std::vector<WorkerUpdate> run_worker_phase(
    const Problem& problem, const RunConfig& cfg, const SystemState& state,
    const std::vector<MasterBroadcast>& bc, const StepSizes& steps,
    std::vector<WorkerStreams>& streams, long t) {
  const int n = cfg.dims.n_workers;
  std::vector<WorkerUpdate> updates(n);
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](int j) {
    try {
      updates[j] = worker_step(j, state.x1[j], state.x2[j], state.x3[j],
                               bc[j], problem.f1[j], cfg.penalty,
                               cfg.smoothing, steps, cfg.greybox_level1,
                               streams[j]);
    } catch (...) {
      errors[j] = std::current_exception();
    }
  };

  if (n > 1 && thread_cap() > 1) {
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (int j = 0; j < n; ++j) threads.emplace_back(work, j);
    for (auto& th : threads) th.join();
  } else {
    for (int j = 0; j < n; ++j) work(j);
  }

  for (int j = 0; j < n; ++j) {
    if (!errors[j]) continue;
    try {
      std::rethrow_exception(errors[j]);
    } catch (const std::exception& e) {
      throw std::runtime_error("iteration " + std::to_string(t) + ", worker " +
                               std::to_string(j) + ": " + e.what());
    }
  }
  return updates;
}

MasterBroadcast make_broadcast(int j, const SystemState& state,
                               const OuterGrad& og) {
  MasterBroadcast bc;
  bc.z1 = state.z1;
  bc.z2 = state.z2;
  bc.z3 = state.z3;
  bc.grad_o_x2 = og.x2[j];
  bc.grad_o_x3 = og.x3[j];
  return bc;
}

void account_phi_rounds(LocalTransport& tp, const SystemState& state,
                        int n_workers, long rounds, bool inner) {
  for (long r = 0; r < rounds; ++r) {
    for (int j = 0; j < n_workers; ++j) {
      tp.send_up(j, PhiRoundUp{j, inner ? state.x3[j] : state.x2[j]},
                 CommPhase::cut_update);
      tp.recv_up(j);
      tp.send_down(j, PhiRoundDown{inner ? state.z3 : state.z2},
                   CommPhase::cut_update);
      tp.recv_down(j);
    }
  }
}

bool whitebox_gap_available(const Problem& problem) {
  for (const auto& f : problem.f1)
    if (!f.has_gradient()) return false;
  return true;
}

}  // namespace

RunReport run_algorithm(const Problem& problem, const RunConfig& cfg) {
  cfg.validate();
  const Dims& dims = cfg.dims;
  if (problem.dims.d1 != dims.d1 || problem.dims.d2 != dims.d2 ||
      problem.dims.d3 != dims.d3 || problem.dims.n_workers != dims.n_workers)
    throw std::invalid_argument("run_algorithm: problem/config dims mismatch");
  if (problem.f1.size() != static_cast<std::size_t>(dims.n_workers) ||
      problem.f2.size() != static_cast<std::size_t>(dims.n_workers) ||
      problem.f3.size() != static_cast<std::size_t>(dims.n_workers))
    throw std::invalid_argument("run_algorithm: oracle count mismatch");
  if (cfg.use_exact_phi && (!problem.phi_in_exact || !problem.phi_out_exact))
    throw std::invalid_argument(
        "run_algorithm: exact residuals requested but not provided");

  const StepSizes steps = cfg.resolve_steps();
  const bool whitebox_gap = whitebox_gap_available(problem);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  SystemState state = SystemState::zeros(dims);
  CutPool pool;
  LocalTransport tp(dims.n_workers);

  std::vector<WorkerStreams> wstreams;
  wstreams.reserve(dims.n_workers);
  for (int j = 0; j < dims.n_workers; ++j)
    wstreams.push_back(WorkerStreams{
        RngStream(cfg.seed, StreamRole::worker, j, purpose::block_x1),
        RngStream(cfg.seed, StreamRole::worker, j, purpose::block_x2),
        RngStream(cfg.seed, StreamRole::worker, j, purpose::block_x3)});
  RngStream cut_in_stream(cfg.seed, StreamRole::master, 0, purpose::cut_inner);
  RngStream cut_out_stream(cfg.seed, StreamRole::master, 0,
                           purpose::cut_outer);
  RngStream phi_in_root(cfg.seed, StreamRole::master, 0, purpose::phi_inner);
  RngStream phi_out_root(cfg.seed, StreamRole::master, 0, purpose::phi_outer);
  RngStream gap_stream(cfg.seed, StreamRole::master, 0, purpose::gap);

  // The starting broadcast reuses the shared initial state; it is not a
  // transmitted message and is not counted.
  std::vector<MasterBroadcast> bc(dims.n_workers);
  {
    OuterGrad og0 = grad_o(pool.outer, dims, state, cfg.penalty);
    for (int j = 0; j < dims.n_workers; ++j)
      bc[j] = make_broadcast(j, state, og0);
  }

  RunReport report;
  long refresh_events = 0;
  auto t_start = std::chrono::steady_clock::now();

  for (long t = 0; t < cfg.t_max; ++t) {
    auto updates =
        run_worker_phase(problem, cfg, state, bc, steps, wstreams, t);
    for (int j = 0; j < dims.n_workers; ++j)
      tp.send_up(j, std::move(updates[j]), CommPhase::iteration);
    for (int j = 0; j < dims.n_workers; ++j) {
      auto upd = std::get<WorkerUpdate>(tp.recv_up(j));
      state.x1[j] = std::move(upd.x1);
      state.x2[j] = std::move(upd.x2);
      state.x3[j] = std::move(upd.x3);
    }

    master_step(dims, state, pool.outer, cfg.penalty, steps);

    if ((t + 1) % cfg.cadence == 0 && t < cfg.t1) {
      long rounds = cfg.cadence * cfg.phi.rounds;
      CutEvent ev;
      ev.t = t + 1;

      if (cfg.gen_inner) {
        SmoothingConfig scfg = cfg.smoothing;
        scfg.batch = cfg.cut_batch;
        PhiConfig pc = cfg.phi;
        pc.rounds = static_cast<int>(rounds);
        ScalarFn fn =
            cfg.use_exact_phi
                ? ScalarFn(problem.phi_in_exact)
                : make_phi_in_fn(
                      dims, problem.f3, pc,
                      phi_in_root.substream(
                          static_cast<std::uint32_t>(refresh_events)));
        auto r = generate_inner_cut(dims, state, fn, scfg, cfg.penalty.eps_in,
                                    cut_in_stream, t + 1);
        ev.inner_id = pool.add(std::move(r.cut)).id;
        account_phi_rounds(tp, state, dims.n_workers, rounds, true);
      }
      if (cfg.gen_outer) {
        SmoothingConfig scfg = cfg.smoothing;
        scfg.batch = cfg.cut_batch;
        PhiConfig pc = cfg.phi;
        pc.rounds = static_cast<int>(rounds);
        ScalarFn fn =
            cfg.use_exact_phi
                ? ScalarFn(problem.phi_out_exact)
                : make_phi_out_fn(
                      dims, problem.f2, pool.inner, pc,
                      phi_out_root.substream(
                          static_cast<std::uint32_t>(refresh_events)));
        auto r = generate_outer_cut(dims, state, fn, scfg,
                                    cfg.penalty.eps_out, cut_out_stream,
                                    t + 1);
        ev.outer_id = pool.add(std::move(r.cut)).id;
        account_phi_rounds(tp, state, dims.n_workers, rounds, false);
      }
      if (cfg.prune) {
        Vec v_in = flatten_inner(dims, state, state.z2);
        Vec v_out = flatten_outer(dims, state);
        ev.pruned_ids = pool.prune_inactive(v_in, v_out);
      }
      ev.pool_size_after = pool.size();
      report.cut_history.push_back(std::move(ev));
      ++refresh_events;
    }

    OuterGrad og = grad_o(pool.outer, dims, state, cfg.penalty);
    for (int j = 0; j < dims.n_workers; ++j)
      tp.send_down(j, make_broadcast(j, state, og), CommPhase::iteration);
    for (int j = 0; j < dims.n_workers; ++j)
      bc[j] = std::get<MasterBroadcast>(tp.recv_down(j));

    state.t = t + 1;
    report.t_reached = t + 1;

    bool last = (t + 1 == cfg.t_max);
    if ((t + 1) % cfg.gap_check_every == 0 || last) {
      double F = eval_F(dims, state, problem.f1, pool.outer, cfg.penalty);
      double gap = nan;
      if (whitebox_gap) {
        gap = stationarity_gap(dims, state, problem.f1, pool.outer,
                               cfg.penalty);
      } else if (cfg.eps_stop > 0.0) {
        gap = stationarity_gap_zo(dims, state, problem.f1, pool.outer,
                                  cfg.penalty, cfg.smoothing, 256, gap_stream)
                  .gap;
      }
      report.trace_t.push_back(t + 1);
      report.f_trace.push_back(F);
      report.gap_trace.push_back(gap);
      if (cfg.eps_stop > 0.0 && gap <= cfg.eps_stop) {
        report.t_eps = t + 1;
        break;
      }
    }
  }

  auto t_end = std::chrono::steady_clock::now();
  report.wall_ms =
      cfg.deterministic_timing
          ? 0.0
          : std::chrono::duration<double, std::milli>(t_end - t_start).count();
  report.final_F = eval_F(dims, state, problem.f1, pool.outer, cfg.penalty);
  report.final_state = std::move(state);
  report.ledger = tp.ledger();
  report.final_pool = std::move(pool);
  return report;
}

std::string RunReport::to_text() const {
  std::ostringstream os;
  os.precision(17);
  os << "t_reached " << t_reached << '\n';
  os << "t_eps " << (t_eps ? *t_eps : -1) << '\n';
  os << "final_F " << final_F << '\n';
  os << "wall_ms " << wall_ms << '\n';
  os << "ledger " << ledger.up_scalars << ' ' << ledger.down_scalars << ' '
     << ledger.iter_up << ' ' << ledger.iter_down << ' ' << ledger.cut_up
     << ' ' << ledger.cut_down << '\n';
  os << "trace";
  for (std::size_t i = 0; i < trace_t.size(); ++i)
    os << ' ' << trace_t[i] << ':' << f_trace[i] << ':' << gap_trace[i];
  os << '\n';
  auto dump = [&os](const char* name, const Vec& v) {
    os << name;
    for (double x : v) os << ' ' << x;
    os << '\n';
  };
  dump("z1", final_state.z1);
  dump("z2", final_state.z2);
  dump("z3", final_state.z3);
  for (std::size_t j = 0; j < final_state.x1.size(); ++j) {
    os << "worker " << j << '\n';
    dump("  x1", final_state.x1[j]);
    dump("  x2", final_state.x2[j]);
    dump("  x3", final_state.x3[j]);
  }
  os << "cut_events " << cut_history.size() << '\n';
  for (const auto& ev : cut_history) {
    os << "  t=" << ev.t << " inner=" << ev.inner_id
       << " outer=" << ev.outer_id << " pool=" << ev.pool_size_after
       << " pruned=";
    for (std::size_t i = 0; i < ev.pruned_ids.size(); ++i)
      os << (i ? "," : "") << ev.pruned_ids[i];
    os << '\n';
  }
  os << "pool\n" << to_string(final_pool);
  return os.str();
}

}  // namespace dtzo
