#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "dtzo/phi.hpp"
#include "dtzo/problems.hpp"

using namespace dtzo;

namespace {

RngStream test_stream(std::uint32_t tag) {
  return RngStream(303, StreamRole::test, tag, purpose::generic);
}

PhiConfig small_cfg(int n_workers, int rounds, double eta) {
  PhiConfig cfg = PhiConfig::defaults(n_workers);
  cfg.rounds = rounds;
  cfg.eta_x = eta;
  cfg.eta_z = eta;
  cfg.smoothing.mu = 1e-5;
  return cfg;
}

}  // namespace

TEST_CASE("zero rounds are rejected") {
  Dims dims{1, 1, 1, 1};
  QuadraticInstance inst = gen_quadratic(dims, 1);
  Problem prob = inst.to_problem();
  PhiConfig cfg = small_cfg(1, 0, 0.1);
  CHECK_THROWS(phi_in_kstep(dims, {0.0}, {0.0}, {{0.0}}, {0.0}, prob.f3, cfg,
                            test_stream(1)));
}

TEST_CASE("constant third level with zero proximity weight gives phi = 0") {
  Dims dims{1, 1, 1, 2};
  std::vector<Oracle> f3;
  for (int j = 0; j < 2; ++j)
    f3.emplace_back(3, j, [](const Vec&, const Vec&, const Vec&) { return 5.0; });
  PhiConfig cfg = small_cfg(2, 10, 0.1);
  cfg.gamma = {0.0, 0.0};
  KStepResult r = phi_in_kstep(dims, {0.0}, {0.0}, {{0.4}, {-0.3}}, {0.1}, f3,
                               cfg, test_stream(2));
  CHECK(r.phi == 0.0);
  CHECK(r.x_end[0] == Vec{0.4});
  CHECK(r.z_end == Vec{0.1});
}

TEST_CASE("phi is non-negative and deterministic under a fixed stream") {
  Dims dims{1, 2, 2, 2};
  QuadraticInstance inst = gen_quadratic(dims, 5);
  Problem prob = inst.to_problem();
  PhiConfig cfg = small_cfg(2, 5, 0.05);
  RngStream s = test_stream(3);
  std::vector<Vec> x3{{0.2, -0.1}, {0.0, 0.3}};
  KStepResult r1 = phi_in_kstep(dims, {0.1}, {0.0, 0.0}, x3, {0.1, 0.1},
                                prob.f3, cfg, s);
  KStepResult r2 = phi_in_kstep(dims, {0.1}, {0.0, 0.0}, x3, {0.1, 0.1},
                                prob.f3, cfg, s);
  CHECK(r1.phi >= 0.0);
  CHECK(r1.phi == r2.phi);
  CHECK(r1.z_end == r2.z_end);
  for (int j = 0; j < 2; ++j) CHECK(r1.x_end[j] == r2.x_end[j]);
}

TEST_CASE("starting at the third-level fixed point gives a tiny residual") {
  Dims dims{1, 1, 1, 1};
  QuadraticInstance inst = gen_quadratic(dims, 6);
  Problem prob = inst.to_problem();
  Vec z1{0.2}, z2{-0.1};
  Vec fp = inst.feasible_inner_point(z1, z2);
  InnerLayout L{dims};
  std::vector<Vec> x3{{fp[L.x3_off(0)]}};
  Vec z3{fp[L.z3_off()]};
  PhiConfig cfg = small_cfg(1, 50, 0.1);
  cfg.smoothing.mu = 1e-6;
  KStepResult r = phi_in_kstep(dims, z1, z2, x3, z3, prob.f3, cfg,
                               test_stream(4));
  CHECK(r.phi <= 1e-6);
}

TEST_CASE("starting at the second-level fixed point gives a tiny residual") {
  Dims dims{1, 1, 1, 1};
  QuadraticInstance inst = gen_quadratic(dims, 7);
  Problem prob = inst.to_problem();
  Vec z1{0.15};
  Vec fp = inst.feasible_outer_point(z1);
  OuterLayout L{dims};
  std::vector<Vec> x2{{fp[L.x2_off(0)]}};
  std::vector<Vec> x3{{fp[L.x3_off(0)]}};
  Vec z2{fp[L.z2_off()]};
  Vec z3{fp[L.z3_off()]};
  PhiConfig cfg = small_cfg(1, 50, 0.1);
  cfg.smoothing.mu = 1e-6;
  KStepResult r = phi_out_kstep(dims, z1, x2, x3, z2, z3, prob.f2, {}, cfg,
                                test_stream(5));
  CHECK(r.phi <= 1e-6);
}

TEST_CASE("an empty inner pool matches the pool-free path bit for bit") {
  Dims dims{1, 2, 1, 2};
  QuadraticInstance inst = gen_quadratic(dims, 8);
  Problem prob = inst.to_problem();
  PhiConfig cfg = small_cfg(2, 8, 0.05);
  std::vector<Vec> x2{{0.3, -0.2}, {0.1, 0.4}};
  std::vector<Vec> x3{{0.2}, {-0.1}};
  RngStream s = test_stream(6);
  KStepResult with_empty = phi_out_kstep(dims, {0.1}, x2, x3, {0.0, 0.0},
                                         {0.2}, prob.f2, {}, cfg, s);
  // an inactive cut (huge slack) must also leave the trajectory unchanged
  QuadraticCut inactive;
  inactive.layer = CutLayer::inner;
  inactive.a = Vec(dims.inner_cut_dim(), 0.0);
  inactive.b = Vec(dims.inner_cut_dim(), 0.0);
  inactive.e = 0.0;
  inactive.slack = 1e9;
  KStepResult with_inactive = phi_out_kstep(dims, {0.1}, x2, x3, {0.0, 0.0},
                                            {0.2}, prob.f2, {inactive}, cfg, s);
  CHECK(with_empty.phi == with_inactive.phi);
  CHECK(with_empty.z_end == with_inactive.z_end);
}

TEST_CASE("a violated inner cut bends the z2 trajectory") {
  Dims dims{1, 1, 1, 1};
  QuadraticInstance inst = gen_quadratic(dims, 9);
  Problem prob = inst.to_problem();
  PhiConfig cfg = small_cfg(1, 10, 0.05);
  std::vector<Vec> x2{{0.3}};
  std::vector<Vec> x3{{0.2}};
  RngStream s = test_stream(7);
  KStepResult base = phi_out_kstep(dims, {0.1}, x2, x3, {0.0}, {0.2}, prob.f2,
                                   {}, cfg, s);
  QuadraticCut violated;
  violated.layer = CutLayer::inner;
  violated.a = Vec(dims.inner_cut_dim(), 0.0);
  violated.b = Vec(dims.inner_cut_dim(), 0.0);
  InnerLayout L{dims};
  violated.b[L.z2_off()] = 1.0;  // h = z2 + 2 > 0 everywhere near the origin
  violated.e = 2.0;
  violated.slack = 0.0;
  KStepResult bent = phi_out_kstep(dims, {0.1}, x2, x3, {0.0}, {0.2}, prob.f2,
                                   {violated}, cfg, s);
  double dz = std::abs(base.z_end[0] - bent.z_end[0]);
  CHECK(dz > 1e-8);
}

TEST_CASE("cut penalty gradient block matches a hand-computed hinge") {
  QuadraticCut c;
  c.a = {-1.0, 0.0};
  c.b = {8.0, 1.0};
  c.e = -8.0;
  c.slack = 0.0;
  Vec v{3.0, 2.0};  // h = -9 + 24 - 8 + 2 = 9
  Vec g = cut_penalty_grad_block({c}, v, 1.5, 0, 2);
  // 2 p (h - slack) (2 a_k v_k + b_k)
  CHECK(g[0] == doctest::Approx(2.0 * 1.5 * 9.0 * (-6.0 + 8.0)).epsilon(1e-14));
  CHECK(g[1] == doctest::Approx(2.0 * 1.5 * 9.0 * 1.0).epsilon(1e-14));
  // satisfied cut contributes nothing
  c.e = -100.0;
  Vec g0 = cut_penalty_grad_block({c}, v, 1.5, 0, 2);
  CHECK(g0 == Vec{0.0, 0.0});
}

TEST_CASE("exact residuals: zero at the argmin, hand value one dimension up") {
  Dims dims{1, 1, 1, 1};
  QuadraticInstance inst = gen_quadratic(dims, 10);
  Vec z1{0.25}, z2{-0.4};
  Vec fp = inst.feasible_inner_point(z1, z2);
  CHECK(inst.exact_phi_in(fp) == doctest::Approx(0.0).epsilon(1e-12));

  // single worker, displacing x3 and z3 together by delta moves the point
  // delta away from the fixed point in each of the two coordinates
  Vec shifted = fp;
  InnerLayout L{dims};
  shifted[L.x3_off(0)] += 2.0;
  shifted[L.z3_off()] += 2.0;
  CHECK(inst.exact_phi_in(shifted) == doctest::Approx(8.0).epsilon(1e-10));

  Vec fpo = inst.feasible_outer_point(z1);
  CHECK(inst.exact_phi_out(fpo) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("k-step residual approaches the exact residual") {
  for (std::uint64_t seed : {11ull, 12ull, 13ull}) {
    Dims dims{1, 2, 2, 1};
    QuadraticInstance inst = gen_quadratic(dims, seed);
    Problem prob = inst.to_problem();
    Vec z1{0.1}, z2{0.2, -0.1};
    std::vector<Vec> x3{{0.3, 0.0}};
    Vec z3{-0.2, 0.1};
    PhiConfig cfg = small_cfg(1, 400, 0.1);
    cfg.smoothing.mu = 1e-7;
    KStepResult r =
        phi_in_kstep(dims, z1, z2, x3, z3, prob.f3, cfg, test_stream(20));
    Vec v = flatten_inner(dims, x3, z1, z2, z3);
    CHECK(std::abs(r.phi - inst.exact_phi_in(v)) < 1e-4);
  }
}

TEST_CASE("k-step residual stabilizes beyond a burn-in") {
  Dims dims{1, 1, 1, 2};
  int ok = 0;
  const int n_inst = 10;
  for (int i = 0; i < n_inst; ++i) {
    QuadraticInstance inst = gen_quadratic(dims, 100 + i);
    Problem prob = inst.to_problem();
    Vec z1{0.1}, z2{0.0};
    std::vector<Vec> x3{{0.4}, {-0.3}};
    Vec z3{0.2};
    Vec v = flatten_inner(dims, x3, z1, z2, z3);
    double target = inst.exact_phi_in(v);
    double prev_err = std::numeric_limits<double>::infinity();
    bool monotone = true;
    // K = 5 serves as the burn-in; monotonicity is asked of the tail
    for (int K : {10, 20, 50}) {
      PhiConfig cfg = small_cfg(2, K, 0.1);
      cfg.smoothing.mu = 1e-7;
      KStepResult r =
          phi_in_kstep(dims, z1, z2, x3, z3, prob.f3, cfg, test_stream(30));
      double err = std::abs(r.phi - target);
      if (err > prev_err + 1e-9) monotone = false;
      prev_err = err;
    }
    ok += monotone;
  }
  CHECK(ok >= 8);
}

TEST_CASE("phi function wrappers replay the frozen stream") {
  Dims dims{1, 1, 1, 1};
  QuadraticInstance inst = gen_quadratic(dims, 14);
  Problem prob = inst.to_problem();
  PhiConfig cfg = small_cfg(1, 5, 0.05);
  RngStream frozen = test_stream(40);
  ScalarFn fin = make_phi_in_fn(dims, prob.f3, cfg, frozen);
  Vec v = flatten_inner(dims, {{0.3}}, {0.1}, {0.0}, {-0.2});
  double a = fin(v);
  double b = fin(v);
  CHECK(a == b);

  ScalarFn fout = make_phi_out_fn(dims, prob.f2, {}, cfg, frozen);
  Vec vo = flatten_outer(dims, {{0.1}}, {{0.3}}, {0.1}, {0.0}, {-0.2});
  CHECK(fout(vo) == fout(vo));
}
