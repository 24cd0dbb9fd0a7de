#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wk/kernel.hpp"

using namespace wk;

TEST_CASE("b_eval special cases") {
  KernelModel mx = KernelModel::maxwell();
  CHECK(b_eval(mx, {2.0, 0.0}, {1.0, 0.0}) == 1.0);
  CHECK(b_eval(mx, {0.3, -7.0}, {0.0, 1.0}) == 1.0);

  KernelModel hs = KernelModel::hard_sphere(5.0);
  CHECK(b_eval(hs, {2.0, 0.0}, {1.0, 0.0}) == doctest::Approx(2.0));
  CHECK(b_eval(hs, {2.0, 0.0}, {0.0, 1.0}) == doctest::Approx(0.0));
  CHECK(b_eval(hs, {0.0, 0.0}, {1.0, 0.0}) == doctest::Approx(0.0));  // continuous extension

  KernelModel vh = KernelModel::vhs(0.5, 5.0);
  CHECK(b_eval(vh, {4.0, 0.0}, {0.0, 1.0}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(KernelModel::vhs(1.5, 5.0), GridError);
}

TEST_CASE("linf_A_norm brute-force sup") {
  // maxwell: b/(1+|u|^0) = 1/2 everywhere
  KernelModel mx = KernelModel::maxwell();
  double v1 = linf_A_norm(mx, 2, 5.0, 1000);
  double v2 = linf_A_norm(mx, 2, 5.0, 100000);
  CHECK(v1 == doctest::Approx(0.5));
  CHECK(v2 == doctest::Approx(0.5));

  // hard sphere: sup [w.u]+/(1+|u|) -> u_max/(1+u_max), monotone in u_max
  KernelModel hs = KernelModel::hard_sphere(5.0);
  double h5 = linf_A_norm(hs, 2, 5.0, 200000);
  double h10 = linf_A_norm(hs, 2, 10.0, 200000);
  CHECK(h5 < 1.0);
  CHECK(h10 > h5);
  CHECK(h5 == doctest::Approx(5.0 / 6.0).epsilon(0.02));
  CHECK(h10 == doctest::Approx(10.0 / 11.0).epsilon(0.02));

  // vhs A=0.5: stable within 1% between sample counts
  KernelModel vh = KernelModel::vhs(0.5, 5.0);
  double a = linf_A_norm(vh, 2, 5.0, 2000, 1);
  double b = linf_A_norm(vh, 2, 5.0, 100000, 2);
  CHECK(std::abs(a - b) / b < 0.01);
  CHECK(b == doctest::Approx(std::sqrt(5.0) / (1 + std::sqrt(5.0))).epsilon(0.01));

  CHECK_THROWS_AS(linf_A_norm(mx, 2, 5.0, 10), GridError);
}

TEST_CASE("linf_A_norm rotation invariance") {
  KernelModel hs = KernelModel::hard_sphere(4.0);
  double s1 = linf_A_norm(hs, 2, 4.0, 50000, 11);
  double s2 = linf_A_norm(hs, 2, 4.0, 50000, 99);  // different sampling frame
  CHECK(std::abs(s1 - s2) / s1 < 0.02);
}

TEST_CASE("b_hat_omega tables") {
  GridSpec g = make_grid(2, 16, 5.0);
  KernelModel mx = KernelModel::maxwell();
  BhatTable tm = b_hat_omega(mx, {1.0, 0.0}, g);
  CHECK(tm.delta);
  CHECK(tm.delta_weight == doctest::Approx(std::pow(2 * g.L_v, 2)));

  KernelModel hs = KernelModel::hard_sphere(g.L_v);
  BhatTable th = b_hat_omega(hs, {1.0, 0.0}, g);
  REQUIRE(!th.delta);
  // b real => bhat(-z) = conj bhat(z) on all nodes
  for (int a = 0; a < g.n; ++a)
    for (int b = 0; b < g.n; ++b) {
      int na = (g.n - a) % g.n, nb = (g.n - b) % g.n;
      cplx lhs = th.table.at({na, nb});
      cplx rhs = std::conj(th.table.at({a, b}));
      CHECK(std::abs(lhs - rhs) < 1e-12 * th.table.max_abs());
    }
  // inverse transform reproduces the truncated kernel on the lattice
  NdArray back = th.table;
  std::vector<int> idx(2, 0);
  for (std::size_t flat = 0; flat < back.size(); ++flat) {
    int s = idx[0] + idx[1];
    if (s % 2 != 0) back[flat] = -back[flat];
    for (int a = 1; a >= 0; --a) {
      if (++idx[a] < g.n) break;
      idx[a] = 0;
    }
  }
  back = dft(back, {0, 1}, FftDir::Backward);
  back *= std::pow(1.0 / (std::sqrt(16.0) * g.dv()), 2);
  double worst = 0.0;
  for (int a = 0; a < g.n; ++a)
    for (int b = 0; b < g.n; ++b) {
      std::vector<double> u{g.v(a), g.v(b)};
      double r = std::hypot(u[0], u[1]);
      double expect = r <= g.L_v ? b_eval(hs, u, {1.0, 0.0}) : 0.0;
      worst = std::max(worst, std::abs(back.at({a, b}) - cplx{expect, 0.0}));
    }
  CHECK(worst < 1e-12 * th.table.max_abs());

  KernelModel big = KernelModel::hard_sphere(2 * g.L_v);
  CHECK_THROWS_AS(b_hat_omega(big, {1.0, 0.0}, g), GridError);
}

TEST_CASE("projection and reflection") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> dist;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> w(3), x(3);
    double n2 = 0;
    for (int i = 0; i < 3; ++i) {
      w[i] = dist(rng);
      n2 += w[i] * w[i];
    }
    for (int i = 0; i < 3; ++i) w[i] /= std::sqrt(n2);
    for (int i = 0; i < 3; ++i) x[i] = dist(rng);
    auto p = p_omega(w, x);
    auto pp = p_omega(w, p);
    auto r = r_omega(w, x);
    auto rr = r_omega(w, r);
    double xn = 0, rn = 0;
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(pp[i] - p[i]) < 1e-13);
      CHECK(std::abs(rr[i] - x[i]) < 1e-13);
      xn += x[i] * x[i];
      rn += r[i] * r[i];
    }
    CHECK(std::sqrt(rn) == doctest::Approx(std::sqrt(xn)).epsilon(1e-13));
  }
  auto p = p_omega({1.0, 0.0}, {3.0, 4.0});
  auto r = r_omega({1.0, 0.0}, {3.0, 4.0});
  CHECK(p[0] == doctest::Approx(3.0));
  CHECK(p[1] == doctest::Approx(0.0));
  CHECK(r[0] == doctest::Approx(-3.0));
  CHECK(r[1] == doctest::Approx(4.0));
}

TEST_CASE("collide conserves and is involutive") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> dist;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> v(3), v2(3), w(3);
    double n2 = 0;
    for (int i = 0; i < 3; ++i) {
      v[i] = dist(rng);
      v2[i] = dist(rng);
      w[i] = dist(rng);
      n2 += w[i] * w[i];
    }
    for (int i = 0; i < 3; ++i) w[i] /= std::sqrt(n2);
    std::vector<double> vs, v2s, vb, v2b;
    collide(v, v2, w, vs, v2s);
    collide(vs, v2s, w, vb, v2b);
    double e0 = 0, e1 = 0;
    for (int i = 0; i < 3; ++i) {
      CHECK(std::abs(vb[i] - v[i]) < 1e-13);
      CHECK(std::abs(v2b[i] - v2[i]) < 1e-13);
      CHECK(vs[i] + v2s[i] == doctest::Approx(v[i] + v2[i]).epsilon(1e-14));
      e0 += v[i] * v[i] + v2[i] * v2[i];
      e1 += vs[i] * vs[i] + v2s[i] * v2s[i];
    }
    CHECK(e1 == doctest::Approx(e0).epsilon(1e-12));
  }
}

TEST_CASE("sphere rule weights") {
  CHECK(sphere_rule(1, 0).total_weight() == doctest::Approx(2.0));
  CHECK(sphere_rule(2, 32).total_weight() == doctest::Approx(2 * kPi));
  CHECK(sphere_rule(3, 16).total_weight() == doctest::Approx(4 * kPi));
  auto r = sphere_rule(3, 8);
  for (const auto& w : r.nodes) {
    double n2 = 0;
    for (double c : w) n2 += c * c;
    CHECK(std::sqrt(n2) == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK_NOTHROW(CollisionGeometry({0.6, 0.8}));
  CHECK_THROWS_AS(CollisionGeometry({0.6, 0.9}), GridError);
}
