#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dtzo/problems.hpp"
#include "dtzo/runtime.hpp"

namespace dtzo {

enum class SweepParam { t1, mu };

struct SweepRow {
  std::string method = "dtzo";
  std::uint64_t seed = 0;
  std::string param;
  double value = 0.0;
  std::optional<Metrics> metrics;  // robust-HO runs only
  double final_F = 0.0;
  std::optional<long> t_eps;
  long up_scalars = 0;
  long down_scalars = 0;
  double wall_ms = 0.0;
};

// Frozen column set.
std::string sweep_csv_header();
std::string to_csv_row(const SweepRow& row);
std::string to_csv(const std::vector<SweepRow>& rows);

struct SweepSpec {
  SweepParam param = SweepParam::t1;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  bool quadratic = false;  // default: robust-HO synthetic instance
  std::uint64_t instance_seed = 7;
};

/// One row per (value, seed), in that order, DTZO runs only. Rows are
/// computed in parallel across runs (capped by DTZO_THREADS) but the
/// output order is fixed by the spec.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const RunConfig& base);

/// Resizes per-worker config vectors to a new dims (used when the target
/// instance dictates the dimensions).
RunConfig adapt_config(const RunConfig& base, const Dims& dims);

}  // namespace dtzo
