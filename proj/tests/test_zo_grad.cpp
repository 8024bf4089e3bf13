#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dtzo/rng.hpp"
#include "dtzo/zo_grad.hpp"

using namespace dtzo;

namespace {
RngStream test_stream(std::uint32_t tag) {
  return RngStream(101, StreamRole::test, tag, purpose::generic);
}
}  // namespace

TEST_CASE("two-point estimate vanishes on constant functions") {
  ScalarFn f = [](const Vec&) { return 3.5; };
  Vec x{0.2, -0.4};
  Vec u{1.3, -0.7};
  Vec g = two_point_estimate(f, x, 1e-3, u);
  CHECK(g == Vec{0.0, 0.0});
}

TEST_CASE("two-point estimate closed form on a linear function") {
  Vec w{1.0, 2.0};
  ScalarFn f = [&](const Vec& x) { return dot(w, x); };
  Vec g = two_point_estimate(f, {0.0, 0.0}, 0.5, {1.0, 0.0});
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("two-point estimate on x^2 is the forward difference") {
  ScalarFn f = [](const Vec& x) { return x[0] * x[0]; };
  Vec g = two_point_estimate(f, {1.0}, 0.1, {1.0});
  CHECK(g[0] == doctest::Approx(2.1).epsilon(1e-12));
}

TEST_CASE("two-point estimate consumes exactly two evaluations") {
  int calls = 0;
  ScalarFn f = [&](const Vec& x) {
    ++calls;
    return x[0];
  };
  two_point_estimate(f, {0.0}, 1e-2, {1.0});
  CHECK(calls == 2);
}

TEST_CASE("two-point estimate rejects direction of wrong length") {
  ScalarFn f = [](const Vec& x) { return x[0]; };
  CHECK_THROWS(two_point_estimate(f, {0.0, 0.0}, 1e-2, {1.0}));
}

TEST_CASE("two-point estimate reports non-finite evaluations") {
  ScalarFn f = [](const Vec&) { return std::nan(""); };
  CHECK_THROWS(two_point_estimate(f, {0.0}, 1e-2, {1.0}));
}

TEST_CASE("multi-point with batch one matches two-point on the same draw") {
  ScalarFn f = [](const Vec& x) { return std::sin(x[0]) + x[1] * x[1]; };
  Vec x{0.3, -0.2};
  SmoothingConfig cfg{1e-3, 1, 1.0};
  RngStream s1 = test_stream(1);
  RngStream s2 = s1;
  GradEstimate est = multi_point_estimate(f, x, cfg, s1);
  Vec u = s2.gaussian_vec(2);
  Vec direct = two_point_estimate(f, x, cfg.mu, u);
  CHECK(est.g == direct);
  CHECK(est.evals == 2);
  CHECK(est.std_err == Vec{0.0, 0.0});
}

TEST_CASE("multi-point on a linear function averages per-sample estimates") {
  Vec w{2.0, -1.0, 0.5};
  ScalarFn f = [&](const Vec& x) { return dot(w, x); };
  SmoothingConfig cfg{1e-2, 8, 1.0};
  RngStream s1 = test_stream(2);
  RngStream s2 = s1;
  GradEstimate est = multi_point_estimate(f, {0.0, 0.0, 0.0}, cfg, s1);
  Vec mean(3, 0.0);
  for (int p = 0; p < cfg.batch; ++p) {
    Vec u = s2.gaussian_vec(3);
    axpy(dot(w, u) / cfg.batch, u, mean);
  }
  for (int k = 0; k < 3; ++k)
    CHECK(est.g[k] == doctest::Approx(mean[k]).epsilon(1e-9));
  CHECK(est.evals == cfg.batch + 1);
}

TEST_CASE("multi-point vanishes on constant functions for any batch") {
  ScalarFn f = [](const Vec&) { return -7.0; };
  for (int b : {1, 4, 32}) {
    SmoothingConfig cfg{1e-3, b, 1.0};
    RngStream s = test_stream(3);
    GradEstimate est = multi_point_estimate(f, {0.1, 0.2}, cfg, s);
    CHECK(norm_sq(est.g) == 0.0);
    CHECK(est.base == -7.0);
  }
}

TEST_CASE("multi-point uses a shared base evaluation") {
  int calls = 0;
  ScalarFn f = [&](const Vec& x) {
    ++calls;
    return x[0];
  };
  SmoothingConfig cfg{1e-3, 16, 1.0};
  RngStream s = test_stream(4);
  multi_point_estimate(f, {0.0}, cfg, s);
  CHECK(calls == 17);
}

TEST_CASE("variance of the multi-point estimator scales like 1/batch") {
  Vec w{1.0, -0.5, 2.0, 0.25};
  ScalarFn f = [&](const Vec& x) { return dot(w, x); };
  Vec x(4, 0.0);
  const int reps = 2000;
  std::vector<int> batches{1, 4, 16, 64};
  std::vector<double> log_var;
  for (std::size_t bi = 0; bi < batches.size(); ++bi) {
    SmoothingConfig cfg{1e-3, batches[bi], 1.0};
    RngStream s = test_stream(10 + static_cast<std::uint32_t>(bi));
    double m = 0.0, m2 = 0.0;
    for (int r = 0; r < reps; ++r) {
      GradEstimate est = multi_point_estimate(f, x, cfg, s);
      m += est.g[0];
      m2 += est.g[0] * est.g[0];
    }
    m /= reps;
    log_var.push_back(std::log(m2 / reps - m * m));
  }
  // least-squares slope of log-variance against log-batch
  double sx = 0, sy = 0, sxy = 0, sxx = 0;
  const int n = static_cast<int>(batches.size());
  for (int i = 0; i < n; ++i) {
    double lx = std::log(static_cast<double>(batches[i]));
    sx += lx;
    sy += log_var[i];
    sxy += lx * log_var[i];
    sxx += lx * lx;
  }
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(-1.0).epsilon(0.15));
}

TEST_CASE("smoothed value of a linear function stays near the base value") {
  Vec w{0.7, -1.1};
  ScalarFn f = [&](const Vec& x) { return dot(w, x) + 2.0; };
  Vec x{0.5, 0.25};
  RngStream s = test_stream(20);
  McValue mc = smoothed_value_mc(f, x, 0.1, 5000, s);
  CHECK(std::abs(mc.mean - f(x)) < 3.0 * mc.std_err);
}

TEST_CASE("smoothed value of x^2 at zero approaches mu^2") {
  ScalarFn f = [](const Vec& x) { return x[0] * x[0]; };
  RngStream s = test_stream(21);
  McValue mc = smoothed_value_mc(f, {0.0}, 0.2, 20000, s);
  CHECK(std::abs(mc.mean - 0.04) < 3.0 * mc.std_err);
}

TEST_CASE("single-sample Monte Carlo flags its standard error as undefined") {
  ScalarFn f = [](const Vec& x) { return x[0]; };
  RngStream s = test_stream(22);
  McValue mc = smoothed_value_mc(f, {1.0}, 0.1, 1, s);
  CHECK(mc.samples == 1);
  CHECK(std::isnan(mc.std_err));
}

TEST_CASE("smoothing config validation") {
  CHECK_NOTHROW(SmoothingConfig{1e-3, 1, 1.0}.validate());
  CHECK_THROWS(SmoothingConfig{0.0, 1, 1.0}.validate());
  CHECK_THROWS(SmoothingConfig{1e-3, 0, 1.0}.validate());
  CHECK_THROWS(SmoothingConfig{1e-3, 1, 0.0}.validate());
}
