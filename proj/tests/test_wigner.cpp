#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "wk/wigner.hpp"

using namespace wk;

namespace {

PhaseField random_field(const GridSpec& g, unsigned seed) {
  PhaseField f(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  for (std::size_t i = 0; i < f.data.size(); ++i) f.data[i] = cplx{dist(rng), dist(rng)};
  return f;
}

// smooth random real field: low-mode trig polynomial, Hermitian spectrum
PhaseField random_smooth_real(const GridSpec& g, unsigned seed, int band) {
  PhaseField f(g);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  const int d = g.d, n = g.n;
  std::vector<int> idx(2 * d, 0);
  int nm = 2 * band + 1;
  std::vector<cplx> coef;
  std::vector<std::vector<int>> modes;
  std::vector<int> m(2 * d, -band);
  while (true) {
    coef.push_back(cplx{dist(rng), dist(rng)});
    modes.push_back(m);
    int a = 2 * d - 1;
    for (; a >= 0; --a) {
      if (++m[a] <= band) break;
      m[a] = -band;
    }
    if (a < 0) break;
  }
  (void)nm;
  for (std::size_t flat = 0; flat < f.data.size(); ++flat) {
    double val = 0.0;
    for (std::size_t t = 0; t < modes.size(); ++t) {
      double ph = 0.0;
      for (int a = 0; a < d; ++a) ph += modes[t][a] * (kPi / g.L_x) * g.x(idx[a]);
      for (int a = 0; a < d; ++a) ph += modes[t][d + a] * (kPi / g.L_v) * g.v(idx[d + a]);
      val += coef[t].real() * std::cos(ph) - coef[t].imag() * std::sin(ph);
    }
    f.data[flat] = val;
    for (int a = 2 * d - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  f.real_flag = true;
  return f;
}

}  // namespace

TEST_CASE("fold/unfold is a bijection") {
  for (int n : {4, 8, 16}) {
    std::vector<int> hit(2 * n * n, 0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        FoldIdx f = fold_axis(a, b, n);
        CHECK((f.s % 2) == (f.r % 2));
        ++hit[f.s * n + f.r];
        int aa, bb;
        unfold_axis(f.s, f.r, n, aa, bb);
        CHECK(aa == a);
        CHECK(bb == b);
      }
    for (int s = 0; s < 2 * n; ++s)
      for (int r = 0; r < n; ++r) CHECK(hit[s * n + r] == ((s % 2) == (r % 2) ? 1 : 0));
  }
}

TEST_CASE("round trip both directions on random fields") {
  for (unsigned seed = 0; seed < 20; ++seed) {
    GridSpec g = make_grid(seed % 2 ? 1 : 2, seed % 3 ? 8 : 16, 4.0);
    PhaseField f = random_field(g, 1000 + seed);
    DensityMatrix gm = inverse_wigner(f);
    PhaseField back = wigner(gm);
    CHECK(rel_diff(back.data, f.data) < 1e-12);
    // gamma -> f -> gamma on valid density matrices
    DensityMatrix gm2 = inverse_wigner(back);
    CHECK(rel_diff(gm2.data, gm.data) < 1e-12);
  }
}

TEST_CASE("isometry with the fixed grid constant") {
  for (unsigned seed = 0; seed < 5; ++seed) {
    GridSpec g = make_grid(2, 8, 3.0);
    PhaseField f = random_field(g, 2000 + seed);
    DensityMatrix gm = inverse_wigner(f);
    double c = std::pow(g.dv() * std::sqrt(static_cast<double>(g.n)), g.d);
    CHECK(gm.data.norm2() == doctest::Approx(c * f.data.norm2()).epsilon(1e-12));
  }
}

TEST_CASE("linearity and zero field") {
  GridSpec g = make_grid(1, 8, 2.0);
  PhaseField z(g);
  DensityMatrix gz = inverse_wigner(z);
  CHECK(gz.data.max_abs() == 0.0);
}

TEST_CASE("gaussian analytic formula") {
  // f = e^{-|x|^2-|v|^2}  ->  gamma = pi^{d/2} e^{-|x+x'|^2/4 - |x-x'|^2/4}
  GridSpec g = make_grid(1, 64, 10.0);
  PhaseField f(g);
  for (int j = 0; j < g.n; ++j)
    for (int k = 0; k < g.n; ++k) {
      double x = g.x(j), v = g.v(k);
      f.data.at({j, k}) = std::exp(-x * x - v * v);
    }
  f.real_flag = true;
  DensityMatrix gm = inverse_wigner(f);
  double worst = 0.0;
  for (int a = 0; a < g.n; ++a)
    for (int b = 0; b < g.n; ++b) {
      FoldIdx fo = fold_axis(a, b, g.n);
      double mid = -g.L_x + fo.s * g.dx() / 2.0;
      double rel = freq_of_bin(fo.r, g.n) * g.dx();
      double expect = std::sqrt(kPi) * std::exp(-mid * mid - rel * rel / 4.0);
      worst = std::max(worst, std::abs(gm.data.at({a, b}).real() - expect));
      worst = std::max(worst, std::abs(gm.data.at({a, b}).imag()));
    }
  CHECK(worst < 1e-10 * std::sqrt(kPi));
}

TEST_CASE("delta in v gives plane wave in rel") {
  // f = delta at v-node k0 (uniform in x) -> gamma ~ e^{i v_k0 (x-x')}
  GridSpec g = make_grid(1, 16, 4.0);
  PhaseField f(g);
  int k0 = 10;
  for (int j = 0; j < g.n; ++j) f.data.at({j, k0}) = cplx{1.0, 0.0};
  DensityMatrix gm = inverse_wigner(f);
  double vk = g.v(k0);
  double worst = 0.0;
  for (int a = 0; a < g.n; ++a)
    for (int b = 0; b < g.n; ++b) {
      // rel phases only see the wrapped separation
      FoldIdx fo = fold_axis(a, b, g.n);
      double rel = freq_of_bin(fo.r, g.n) * g.dx();
      cplx expect = g.dv() * std::polar(1.0, vk * rel);
      worst = std::max(worst, std::abs(gm.data.at({a, b}) - expect));
    }
  CHECK(worst < 1e-12);
}

TEST_CASE("plane-wave kernel concentrates at the matching velocity node") {
  GridSpec g = make_grid(1, 16, 4.0);
  int k0 = 5;
  double vk = g.v(k0);
  DensityMatrix gm(g, 1);
  for (int a = 0; a < g.n; ++a)
    for (int b = 0; b < g.n; ++b) {
      FoldIdx fo = fold_axis(a, b, g.n);
      double rel = freq_of_bin(fo.r, g.n) * g.dx();
      gm.data.at({a, b}) = std::polar(1.0, vk * rel);
    }
  PhaseField f = wigner(gm);
  // f should vanish except at v-node k0 (uniform in x)
  for (int j = 0; j < g.n; ++j)
    for (int k = 0; k < g.n; ++k) {
      double mag = std::abs(f.data.at({j, k}));
      if (k == k0)
        CHECK(mag == doctest::Approx(1.0 / g.dv()).epsilon(1e-10));
      else
        CHECK(mag < 1e-10);
    }
}

TEST_CASE("real f <-> hermitian gamma (resolved fields)") {
  GridSpec g = make_grid(2, 8, 3.0);
  PhaseField f = random_smooth_real(g, 42, 2);
  DensityMatrix gm = inverse_wigner(f);
  CHECK(hermitian_check(gm) <= 1e-12 * gm.data.max_abs());
  CHECK(gm.hermitian_flag);

  // converse: hermitian gamma -> real f
  PhaseField back = wigner(gm);
  CHECK(back.imag_residual() <= 1e-12 * back.data.max_abs());

  // non-hermitian construction: gamma(x,x') = e^{i a x} (x'-independent)
  DensityMatrix bad(make_grid(1, 8, 2.0), 1);
  for (int a = 0; a < 8; ++a)
    for (int b = 0; b < 8; ++b) bad.data.at({a, b}) = std::polar(1.0, 2.0 * kPi * a / 8.0);
  CHECK(hermitian_check(bad) > 0.5);
}

TEST_CASE("pure state gamma = phi tensor conj(phi) has real wigner function") {
  // the kernel at rel-Nyquist separation carries phi tails at half-box
  // distance, so the box must make e^{-L^2/2} negligible for 1e-12 realness
  GridSpec g = make_grid(1, 64, 8.0);
  // gaussian wave packet on the position lattice
  std::vector<cplx> phi(g.n);
  for (int j = 0; j < g.n; ++j) {
    double x = g.x(j);
    phi[j] = std::exp(-x * x) * std::polar(1.0, 1.5 * x);
  }
  DensityMatrix gm(g, 1);
  for (int a = 0; a < g.n; ++a)
    for (int b = 0; b < g.n; ++b) gm.data.at({a, b}) = phi[a] * std::conj(phi[b]);
  CHECK(hermitian_check(gm) < 1e-14);
  PhaseField f = wigner(gm);
  CHECK(f.imag_residual() <= 1e-12 * f.data.max_abs());
}

TEST_CASE("tensor product and symmetry helpers") {
  GridSpec g = make_grid(1, 8, 2.0);
  PhaseField f1 = random_field(g, 5), f2 = random_field(g, 6);
  DensityMatrix a = inverse_wigner(f1), b = inverse_wigner(f2);
  DensityMatrix ab = tensor_product(a, b);
  CHECK(ab.k == 2);
  std::vector<int> X{2, 7}, Xp{4, 1};
  cplx lhs = ab.data.at({2, 7, 4, 1});
  cplx rhs = a.data.at({2, 4}) * b.data.at({7, 1});
  CHECK(std::abs(lhs - rhs) < 1e-14);

  DensityMatrix sym = symmetrize(ab);
  CHECK(symmetry_check(sym, 200, 3) < 1e-13 * sym.data.max_abs());
  DensityMatrix aa = tensor_product(a, a);
  CHECK(symmetry_check(aa, 200, 3) < 1e-13 * aa.data.max_abs());
}

TEST_CASE("mid_state recovers f on even mids") {
  GridSpec g = make_grid(2, 8, 3.0);
  PhaseField f = random_field(g, 99);
  DensityMatrix gm = inverse_wigner(f);
  NdArray ms = mid_state(gm);
  double worst = 0.0;
  std::vector<int> idx(4, 0);
  for (int j0 = 0; j0 < g.n; ++j0)
    for (int j1 = 0; j1 < g.n; ++j1)
      for (int k0 = 0; k0 < g.n; ++k0)
        for (int k1 = 0; k1 < g.n; ++k1) {
          cplx got = ms.at({2 * j0, 2 * j1, k0, k1});
          cplx want = f.data.at({j0, j1, k0, k1});
          worst = std::max(worst, std::abs(got - want));
        }
  CHECK(worst < 1e-12 * f.data.max_abs());
}
