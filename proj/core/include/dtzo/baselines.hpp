#pragma once

#include "dtzo/problems.hpp"
#include "dtzo/runtime.hpp"

namespace dtzo {

enum class BaselineKind { single_level_zo, bilevel_zo };

struct BaselineConfig {
  long t_max = 300;
  double eta = 0.05;          // worker and master weight steps
  double eta_lambda = 0.1;    // hyperparameter step (bilevel only)
  double varphi = 1.0;        // consensus penalty weight
  double mu = 1e-3;           // two-point smoothing
  int lookahead = 3;          // training steps inside the bilevel value fn
  std::uint64_t seed = 0;
  bool fix_regularizer = false;  // bilevel with the update disabled; the
                                 // weight trajectory then matches
                                 // single-level bit for bit
  bool deterministic_timing = false;

  void validate() const;
};

/// Flat baselines sharing DTZO's estimator, streams, metrics and ledger:
///   single_level_zo: consensus zeroth-order descent of the level-2
///     training loss at zero perturbation, regularizer fixed at u = 0.
///   bilevel_zo: the same plus a zeroth-order hyperparameter update
///     through a short common-random-number training lookahead.
/// The returned report stores the consensus weights in final_state.z2 and
/// the hyperparameter in final_state.z1.
RunReport run_baseline(BaselineKind kind, const RobustHOInstance& inst,
                       const BaselineConfig& cfg);

}  // namespace dtzo
