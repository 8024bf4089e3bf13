#pragma once

#include <deque>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dtzo/cuts.hpp"
#include "dtzo/penalty.hpp"
#include "dtzo/phi.hpp"
#include "dtzo/rng.hpp"
#include "dtzo/types.hpp"
#include "dtzo/wire.hpp"

namespace dtzo {

// ---------------------------------------------------------------- messages

struct WorkerUpdate {
  int j = 0;  // sender, carried for bookkeeping; identity on the wire comes
              // from the connection, not the frame
  Vec x1, x2, x3;
};

/// Per-destination broadcast: consensus blocks plus that worker's penalty
/// gradient blocks for the next local step.
struct MasterBroadcast {
  Vec z1, z2, z3;
  Vec grad_o_x2, grad_o_x3;
};

struct PhiRoundUp {
  int j = 0;
  Vec block;  // the worker's current third- or second-level block
};

struct PhiRoundDown {
  Vec block;  // the refreshed consensus block
};

struct Shutdown {};

using Message = std::variant<WorkerUpdate, MasterBroadcast, PhiRoundUp,
                             PhiRoundDown, Shutdown>;

std::size_t scalar_count(const Message& msg);
std::uint8_t tag_of(const Message& msg);

/// Frame round-trip. Decoding needs dims (payload lengths are derivable
/// from the tag) and, for worker-originated tags, the connection's worker
/// index.
std::vector<std::uint8_t> encode_message(const Message& msg);
Message decode_message(const Dims& dims, const wire::Frame& frame,
                       int from_worker);

// --------------------------------------------------------------- transport

enum class CommPhase { iteration, cut_update };

struct CommLedger {
  long up_scalars = 0;
  long down_scalars = 0;
  long iter_up = 0, iter_down = 0;
  long cut_up = 0, cut_down = 0;

  void add_up(long n, CommPhase phase);
  void add_down(long n, CommPhase phase);
};

/// In-process FIFO transport between one master and N workers. Single
/// threaded by contract: the run loop alternates roles, so sends and
/// receives never race. The ledger is written only here.
class LocalTransport {
 public:
  explicit LocalTransport(int n_workers);

  void send_up(int j, Message msg, CommPhase phase);
  Message recv_up(int j);
  void send_down(int j, Message msg, CommPhase phase);
  Message recv_down(int j);

  void close();
  const CommLedger& ledger() const { return ledger_; }

 private:
  std::vector<std::deque<Message>> up_, down_;
  CommLedger ledger_;
  bool open_ = true;
};

// ------------------------------------------------------------------ config

struct RunConfig {
  Dims dims;
  SmoothingConfig smoothing;
  PenaltyConfig penalty;
  std::optional<StepSizes> steps;  // nullopt: derived auto schedule
  long t1 = 0;                     // cut-refresh horizon T1
  long cadence = 1;                // refresh every `cadence` iterations
  PhiConfig phi;                   // K rounds per refresh communication round
  long t_max = 100;
  double eps_stop = 0.0;           // <= 0 disables the gap stopping rule
  std::uint64_t seed = 0;
  int cut_batch = 64;              // perturbation batch for cut generation
  int gap_check_every = 10;
  bool greybox_level1 = false;     // use f1 gradients in worker steps
  bool use_exact_phi = false;      // closed-form residuals (test instances)
  bool prune = true;
  bool gen_inner = true;
  bool gen_outer = true;
  bool deterministic_timing = false;  // report wall_ms as 0

  void validate() const;
  StepSizes resolve_steps() const;
  static RunConfig defaults(const Dims& dims);
};

// ------------------------------------------------------------------ report

struct CutEvent {
  long t = 0;
  long inner_id = -1, outer_id = -1;  // -1: layer disabled this run
  std::vector<long> pruned_ids;
  std::size_t pool_size_after = 0;
};

struct RunReport {
  SystemState final_state;
  std::vector<long> trace_t;
  std::vector<double> f_trace;    // F at the traced iterations
  std::vector<double> gap_trace;  // NaN where the gap was not evaluated
  CommLedger ledger;
  std::vector<CutEvent> cut_history;
  CutPool final_pool;
  std::optional<long> t_eps;
  long t_reached = 0;
  double final_F = 0.0;
  double wall_ms = 0.0;

  std::string to_text() const;  // deterministic serialization
};

struct ExpectedComm {
  long c1 = 0;
  long c2 = 0;
  long total() const { return c1 + c2; }
};

/// Closed-form totals for a run of T iterations under cfg's schedule:
///   c1 = T (2 d1 + 3 d2 + 3 d3) N
///   c2 = 2 N floor(t1 / cadence) * cadence * K * (d2 + d3)
ExpectedComm expected_comm(const RunConfig& cfg, long T);

// ------------------------------------------------------------------- steps

struct WorkerStreams {
  RngStream x1, x2, x3;
};

/// One local update of worker j (4 evaluations of f1_j: a shared base plus
/// one perturbed point per block; grey-box mode replaces the estimates
/// with one gradient call).
WorkerUpdate worker_step(int j, const Vec& x1, const Vec& x2, const Vec& x3,
                         const MasterBroadcast& bc, const Oracle& f1,
                         const PenaltyConfig& pcfg, const SmoothingConfig& sm,
                         const StepSizes& steps, bool greybox,
                         WorkerStreams& streams);

/// Consensus update at the master, in place. Uses grad_o at (new worker
/// blocks, old consensus blocks); the caller recomputes grad_o at the
/// fully updated state for the next broadcast.
void master_step(const Dims& dims, SystemState& state,
                 const std::vector<QuadraticCut>& outer,
                 const PenaltyConfig& pcfg, const StepSizes& steps);

// --------------------------------------------------------------- main loop

RunReport run_algorithm(const Problem& problem, const RunConfig& cfg);

/// Worker-thread cap: DTZO_THREADS if set, else hardware concurrency.
int thread_cap();

}  // namespace dtzo
