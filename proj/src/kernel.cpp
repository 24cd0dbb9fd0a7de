#include "wk/kernel.hpp"

#include <cmath>
#include <random>

namespace wk {

KernelModel KernelModel::maxwell() { return {KernelKind::Maxwell, 0.0, 0.0}; }
KernelModel KernelModel::hard_sphere(double u_max) {
  if (!(u_max > 0)) throw GridError("hard_sphere: u_max must be positive");
  return {KernelKind::HardSphere, 1.0, u_max};
}
KernelModel KernelModel::vhs(double A, double u_max) {
  if (!(A > 0.0 && A < 1.0)) throw GridError("vhs: A must lie in (0,1)");
  if (!(u_max > 0)) throw GridError("vhs: u_max must be positive");
  return {KernelKind::VariableHardSphere, A, u_max};
}

CollisionGeometry::CollisionGeometry(std::vector<double> w) : omega(std::move(w)) {
  double n2 = 0.0;
  for (double c : omega) n2 += c * c;
  if (std::abs(std::sqrt(n2) - 1.0) > 1e-14) throw GridError("omega must be a unit vector");
}

double SphereRule::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

namespace {

// Gauss-Legendre nodes/weights on [-1,1] by Newton on Legendre polynomials.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    double t = std::cos(kPi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = t;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (t * p1 - p0) / (t * t - 1.0);
      double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    double p0 = 1.0, p1 = t;
    for (int j = 2; j <= n; ++j) {
      double p2 = ((2 * j - 1) * t * p1 - (j - 1) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    double dp = n * (t * p1 - p0) / (t * t - 1.0);
    x[i] = t;
    w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
  }
}

}  // namespace

SphereRule sphere_rule(int d, int n_omega) {
  SphereRule r;
  if (d == 1) {
    r.nodes = {{1.0}, {-1.0}};
    r.weights = {1.0, 1.0};
    return r;
  }
  if (d == 2) {
    for (int j = 0; j < n_omega; ++j) {
      double th = 2.0 * kPi * j / n_omega;
      r.nodes.push_back({std::cos(th), std::sin(th)});
      r.weights.push_back(2.0 * kPi / n_omega);
    }
    return r;
  }
  if (d == 3) {
    int nt = std::max(2, n_omega / 2);
    int np = 2 * nt;
    std::vector<double> ct, wt;
    gauss_legendre(nt, ct, wt);
    for (int i = 0; i < nt; ++i) {
      double st = std::sqrt(std::max(0.0, 1.0 - ct[i] * ct[i]));
      for (int j = 0; j < np; ++j) {
        double ph = 2.0 * kPi * j / np;
        r.nodes.push_back({st * std::cos(ph), st * std::sin(ph), ct[i]});
        r.weights.push_back(wt[i] * 2.0 * kPi / np);
      }
    }
    return r;
  }
  throw GridError("sphere_rule: d must be 1, 2 or 3");
}

double b_eval(const KernelModel& m, const std::vector<double>& u, const std::vector<double>& omega) {
  double un = 0.0, dot = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    un += u[i] * u[i];
    dot += u[i] * omega[i];
  }
  un = std::sqrt(un);
  switch (m.kind) {
    case KernelKind::Maxwell:
      return 1.0;
    case KernelKind::HardSphere:
      return std::max(dot, 0.0);  // = |u| [omega.u_hat]_+, continuous at u=0
    case KernelKind::VariableHardSphere:
      return std::pow(un, m.A);
  }
  return 0.0;
}

double linf_A_norm(const KernelModel& m, int d, double u_max, int sample_count, unsigned seed) {
  if (sample_count < 1000) throw GridError("linf_A_norm: need at least 1e3 samples");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double sup = 0.0;
  std::vector<double> u(d), om(d);
  for (int s = 0; s < sample_count; ++s) {
    double r = u_max * std::pow(unif(rng), 1.0 / d);
    double n2 = 0.0;
    for (int i = 0; i < d; ++i) {
      u[i] = gauss(rng);
      n2 += u[i] * u[i];
    }
    double inv = r / std::sqrt(n2);
    for (int i = 0; i < d; ++i) u[i] *= inv;
    n2 = 0.0;
    for (int i = 0; i < d; ++i) {
      om[i] = gauss(rng);
      n2 += om[i] * om[i];
    }
    inv = 1.0 / std::sqrt(n2);
    for (int i = 0; i < d; ++i) om[i] *= inv;
    double val = b_eval(m, u, om) / (1.0 + std::pow(r, m.A));
    sup = std::max(sup, val);
  }
  return sup;
}

BhatTable b_hat_omega(const KernelModel& m, const std::vector<double>& omega, const GridSpec& g) {
  const int d = g.d, n = g.n;
  double umax = m.truncated() ? m.u_max : g.L_v;
  if (m.truncated() && m.u_max > g.L_v + 1e-12)
    throw GridError("b_hat_omega: u_max exceeds the velocity box");
  BhatTable out;
  if (m.kind == KernelKind::Maxwell) {
    out.delta = true;
    out.delta_weight = std::pow(2.0 * g.L_v, d);
    return out;
  }
  std::vector<int> shape(d, n);
  NdArray b(shape);
  std::vector<double> u(d);
  std::vector<int> idx(d, 0);
  for (std::size_t flat = 0; flat < b.size(); ++flat) {
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) {
      u[a] = g.v(idx[a]);
      r2 += u[a] * u[a];
    }
    b[flat] = (std::sqrt(r2) <= umax) ? b_eval(m, u, omega) : 0.0;
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  // bhat(z) = sum_u b(u) e^{-i u.z} dv^d over the truncated lattice; the u
  // lattice is index-centered, so a (-1)^z sign appears per axis.
  std::vector<int> axes(d);
  for (int a = 0; a < d; ++a) axes[a] = a;
  fft_unitary(b, axes, -1);
  b *= std::pow(std::sqrt(static_cast<double>(n)) * g.dv(), d);
  // centered-sample phase: u_k = (k - n/2) dv, z_r = freq(r) dx
  std::vector<int> ridx(d, 0);
  for (std::size_t flat = 0; flat < b.size(); ++flat) {
    int s = 0;
    for (int a = 0; a < d; ++a) s += ridx[a];
    if (s % 2 != 0) b[flat] = -b[flat];
    for (int a = d - 1; a >= 0; --a) {
      if (++ridx[a] < n) break;
      ridx[a] = 0;
    }
  }
  out.table = std::move(b);
  return out;
}

std::vector<double> p_omega(const std::vector<double>& omega, const std::vector<double>& x) {
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += omega[i] * x[i];
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = dot * omega[i];
  return out;
}

std::vector<double> r_omega(const std::vector<double>& omega, const std::vector<double>& x) {
  std::vector<double> p = p_omega(omega, x);
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - 2.0 * p[i];
  return out;
}

void collide(const std::vector<double>& v, const std::vector<double>& v2,
             const std::vector<double>& omega, std::vector<double>& v_out,
             std::vector<double>& v2_out) {
  std::vector<double> diff(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) diff[i] = v2[i] - v[i];
  std::vector<double> p = p_omega(omega, diff);
  v_out.resize(v.size());
  v2_out.resize(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v_out[i] = v[i] + p[i];
    v2_out[i] = v2[i] - p[i];
  }
}

}  // namespace wk
