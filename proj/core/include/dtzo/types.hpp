#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "dtzo/vec.hpp"

namespace dtzo {

/// Block dimensions of the three levels plus worker count.
struct Dims {
  int d1 = 1;
  int d2 = 1;
  int d3 = 1;
  int n_workers = 1;

  int inner_cut_dim() const { return n_workers * d3 + d1 + d2 + d3; }
  int outer_cut_dim() const {
    return n_workers * (d2 + d3) + d1 + d2 + d3;
  }
  void validate() const;
};

/// All worker-local blocks and master consensus blocks at one iteration.
/// Snapshots are immutable values passed between roles.
struct SystemState {
  std::vector<Vec> x1, x2, x3;  // per worker
  Vec z1, z2, z3;
  long t = 0;

  static SystemState zeros(const Dims& dims);
  void check(const Dims& dims) const;  // lengths + finiteness
};

/// Black-box scalar objective f_{i,j}(x1, x2, x3) with evaluation counting.
/// Safe to evaluate from multiple workers concurrently; the counter is
/// shared across copies of the same oracle.
class Oracle {
 public:
  using Fn = std::function<double(const Vec&, const Vec&, const Vec&)>;
  // Block gradients (x1, x2, x3); only for diagnostics and grey-box mode.
  using GradFn =
      std::function<std::array<Vec, 3>(const Vec&, const Vec&, const Vec&)>;

  Oracle() = default;
  Oracle(int level, int worker, Fn f, GradFn g = nullptr);

  double eval(const Vec& x1, const Vec& x2, const Vec& x3) const;
  bool has_gradient() const { return static_cast<bool>(grad_); }
  std::array<Vec, 3> gradient(const Vec& x1, const Vec& x2,
                              const Vec& x3) const;

  std::int64_t eval_count() const { return count_ ? count_->load() : 0; }
  int level() const { return level_; }
  int worker() const { return worker_; }

 private:
  int level_ = 0;
  int worker_ = 0;
  Fn fn_;
  GradFn grad_;
  std::shared_ptr<std::atomic<std::int64_t>> count_;
};

/// A trilevel problem instance: one oracle per (level, worker), plus
/// optional exact soft-constraint residuals over the cut spaces (used by
/// closed-form test instances).
struct Problem {
  Dims dims;
  std::vector<Oracle> f1, f2, f3;  // indexed by worker
  std::function<double(const Vec&)> phi_in_exact;   // over inner cut space
  std::function<double(const Vec&)> phi_out_exact;  // over outer cut space
};

}  // namespace dtzo
