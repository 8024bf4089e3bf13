#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dtzo/layout.hpp"
#include "dtzo/rng.hpp"
#include "dtzo/types.hpp"

using namespace dtzo;

TEST_CASE("rng streams are reproducible for identical ids") {
  RngStream a(42, StreamRole::worker, 3, purpose::block_x1);
  RngStream b(42, StreamRole::worker, 3, purpose::block_x1);
  for (int i = 0; i < 100; ++i) CHECK(a.gaussian() == b.gaussian());
}

TEST_CASE("rng streams with distinct ids differ") {
  RngStream a(42, StreamRole::worker, 3, purpose::block_x1);
  RngStream b(42, StreamRole::worker, 3, purpose::block_x2);
  RngStream c(42, StreamRole::worker, 4, purpose::block_x1);
  RngStream d(42, StreamRole::master, 3, purpose::block_x1);
  RngStream e(43, StreamRole::worker, 3, purpose::block_x1);
  double ref = a.gaussian();
  CHECK(ref != b.gaussian());
  CHECK(ref != c.gaussian());
  CHECK(ref != d.gaussian());
  CHECK(ref != e.gaussian());
}

TEST_CASE("copying a stream snapshots its position") {
  RngStream a(1, StreamRole::test, 0, purpose::generic);
  a.gaussian_vec(7);
  RngStream snap = a;
  Vec v1 = a.gaussian_vec(5);
  Vec v2 = snap.gaussian_vec(5);
  CHECK(v1 == v2);
}

TEST_CASE("substreams are deterministic and independent") {
  RngStream root(9, StreamRole::master, 0, purpose::phi_inner);
  RngStream s1 = root.substream(4);
  RngStream s2 = root.substream(4);
  RngStream s3 = root.substream(5);
  double r = s1.gaussian();
  CHECK(r == s2.gaussian());
  CHECK(r != s3.gaussian());
}

TEST_CASE("gaussian_vec rejects dimension zero") {
  RngStream a(1, StreamRole::test, 0, purpose::generic);
  CHECK_THROWS(a.gaussian_vec(0));
}

TEST_CASE("empirical gaussian mean is near zero") {
  RngStream a(7, StreamRole::test, 0, purpose::generic);
  Vec mean(4, 0.0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    Vec u = a.gaussian_vec(4);
    axpy(1.0, u, mean);
  }
  for (double m : mean) CHECK(std::abs(m / n) < 0.02);
}

TEST_CASE("dims validation and cut-space dimensions") {
  Dims d{3, 2, 1, 2};
  CHECK_NOTHROW(d.validate());
  CHECK(d.inner_cut_dim() == 2 * 1 + 3 + 2 + 1);
  CHECK(d.outer_cut_dim() == 2 * (2 + 1) + 3 + 2 + 1);
  CHECK_THROWS(Dims{0, 1, 1, 1}.validate());
  CHECK_THROWS(Dims{1, 1, 1, 0}.validate());
}

TEST_CASE("system state zeros conform and check catches bad lengths") {
  Dims d{2, 3, 1, 2};
  SystemState s = SystemState::zeros(d);
  CHECK_NOTHROW(s.check(d));
  CHECK(s.x2[1].size() == 3);
  s.z1.push_back(0.0);
  CHECK_THROWS(s.check(d));
  s.z1.pop_back();
  s.x3[0][0] = std::nan("");
  CHECK_THROWS(s.check(d));
}

TEST_CASE("oracle counts evaluations and shares the counter across copies") {
  Oracle f(1, 0, [](const Vec& a, const Vec&, const Vec&) { return a[0]; });
  Oracle copy = f;
  Vec x{1.0}, y{2.0}, z{3.0};
  CHECK(f.eval(x, y, z) == 1.0);
  CHECK(copy.eval(x, y, z) == 1.0);
  CHECK(f.eval_count() == 2);
  CHECK(copy.eval_count() == 2);
  CHECK_FALSE(f.has_gradient());
}

TEST_CASE("flatten_inner canonical order") {
  Dims d{1, 1, 1, 1};
  Vec v = flatten_inner(d, {{2.0}}, {3.0}, {4.0}, {5.0});
  CHECK(v == Vec{2.0, 3.0, 4.0, 5.0});
}

TEST_CASE("flatten_outer canonical order") {
  Dims d{1, 1, 1, 1};
  Vec v = flatten_outer(d, {{1.0}}, {{2.0}}, {3.0}, {4.0}, {5.0});
  CHECK(v == Vec{1.0, 2.0, 3.0, 4.0, 5.0});
}

TEST_CASE("zero state flattens to a zero vector of the right length") {
  Dims d{2, 3, 1, 3};
  SystemState s = SystemState::zeros(d);
  Vec vi = flatten_inner(d, s, s.z2);
  Vec vo = flatten_outer(d, s);
  CHECK(static_cast<int>(vi.size()) == d.inner_cut_dim());
  CHECK(static_cast<int>(vo.size()) == d.outer_cut_dim());
  CHECK(norm_sq(vi) == 0.0);
  CHECK(norm_sq(vo) == 0.0);
}

TEST_CASE("flatten and unflatten are mutually inverse") {
  Dims d{2, 3, 2, 2};
  RngStream rng(5, StreamRole::test, 0, purpose::generic);
  Vec vi = rng.gaussian_vec(d.inner_cut_dim());
  std::vector<Vec> x3;
  Vec z1, z2p, z3;
  unflatten_inner(d, vi, x3, z1, z2p, z3);
  CHECK(flatten_inner(d, x3, z1, z2p, z3) == vi);

  Vec vo = rng.gaussian_vec(d.outer_cut_dim());
  std::vector<Vec> x2, x3b;
  Vec z1b, z2, z3b;
  unflatten_outer(d, vo, x2, x3b, z1b, z2, z3b);
  CHECK(flatten_outer(d, x2, x3b, z1b, z2, z3b) == vo);

  OuterLayout L{d};
  for (int j = 0; j < d.n_workers; ++j)
    for (int k = 0; k < d.d2; ++k) CHECK(x2[j][k] == vo[L.x2_off(j) + k]);
}

TEST_CASE("flatten rejects length mismatches") {
  Dims d{1, 1, 1, 1};
  CHECK_THROWS(flatten_inner(d, {{2.0, 9.0}}, {3.0}, {4.0}, {5.0}));
  CHECK_THROWS(flatten_outer(d, {{1.0}}, {{2.0}}, {3.0, 9.0}, {4.0}, {5.0}));
}
