#include "wk/norms.hpp"

#include <cmath>

namespace wk {

bool NormParams::regime_ok(int d, double A) const {
  if (!(alpha > (d - 1) / 2.0)) return false;
  if (!(beta > d)) return false;
  double inv = 1.0 / sigma;
  if (!(inv > std::max(0.0, 2.0 * A - 1.0) && inv <= 2.0)) return false;
  if (!(kappa > 0.0)) return false;
  return true;
}

namespace {
constexpr double kExpGuard = 700.0;
constexpr double kPopulatedRel = 1e-14;
}  // namespace

double h_norm(const DensityMatrix& gm, const NormParams& p) {
  const GridSpec& g = gm.grid;
  const int d = g.d, n = g.n, k = gm.k;
  SpectralField s = to_spectral(gm);
  double measure = std::pow(g.dxi(), 2 * k * d);
  // to_spectral is unitary; rescale to physical Fourier amplitudes
  double amp = std::pow(g.dx() * std::sqrt(static_cast<double>(n)), k * d);
  double maxmag = s.data.max_abs();
  double acc = 0.0;
  std::vector<int> idx(2 * k * d, 0);
  for (std::size_t flat = 0; flat < s.data.size(); ++flat) {
    double w = 1.0;
    bool guard_hit = false;
    for (int part = 0; part < k; ++part) {
      double plus2 = 0.0, minus2 = 0.0;
      for (int a = 0; a < d; ++a) {
        double xi = g.xi(idx[part * d + a]);
        double xip = g.xi(idx[k * d + part * d + a]);
        plus2 += (xi + xip) * (xi + xip);
        minus2 += (xi - xip) * (xi - xip);
      }
      double bp = jbracket(plus2), bm = jbracket(minus2);
      double expo = p.kappa * std::pow(bm, 1.0 / p.sigma);
      if (expo > kExpGuard) guard_hit = true;
      if (!guard_hit) w *= std::pow(bp, p.alpha) * std::pow(bm, p.beta) * std::exp(expo);
    }
    double mag = std::abs(s.data[flat]);
    if (guard_hit) {
      if (mag > kPopulatedRel * maxmag)
        throw ScaleError("h_norm: exponential weight overflow on a populated node");
    } else {
      acc += w * w * mag * mag;
    }
    for (int a = 2 * k * d - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return std::sqrt(acc * measure) * amp;
}

double classical_norm(const PhaseField& f, const NormParams& p) {
  const GridSpec& g = f.grid;
  const int d = g.d, n = g.n;
  std::vector<int> xaxes(d);
  for (int a = 0; a < d; ++a) xaxes[a] = a;
  NdArray fx = dft(f.data, xaxes, FftDir::Forward);
  std::vector<int> idx(2 * d, 0);
  for (std::size_t flat = 0; flat < fx.size(); ++flat) {
    double xi2 = 0.0;
    for (int a = 0; a < d; ++a) {
      double xi = g.xi(idx[a]);
      xi2 += xi * xi;
    }
    fx[flat] *= std::pow(jbracket(xi2), p.alpha);
    for (int a = 2 * d - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  fx = dft(fx, xaxes, FftDir::Backward);
  double maxmag = fx.max_abs();
  double acc = 0.0;
  std::fill(idx.begin(), idx.end(), 0);
  for (std::size_t flat = 0; flat < fx.size(); ++flat) {
    double v2 = 0.0;
    for (int a = 0; a < d; ++a) {
      double v = 2.0 * g.v(idx[d + a]);
      v2 += v * v;
    }
    double bm = jbracket(v2);
    double expo = p.kappa * std::pow(bm, 1.0 / p.sigma);
    double mag = std::abs(fx[flat]);
    if (expo > kExpGuard) {
      if (mag > kPopulatedRel * maxmag)
        throw ScaleError("classical_norm: exponential weight overflow on a populated node");
    } else {
      double w = std::pow(bm, p.beta) * std::exp(expo);
      acc += w * w * mag * mag;
    }
    for (int a = 2 * d - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return std::sqrt(acc * std::pow(g.dx(), d) * std::pow(g.dv(), d));
}

double hierarchy_norm(const std::vector<DensityMatrix>& Gamma, const NormParams& p) {
  if (Gamma.empty()) throw GridError("hierarchy_norm: empty state");
  double acc = 0.0;
  double w = 1.0;
  for (std::size_t k = 0; k < Gamma.size(); ++k) {
    w *= p.xi_w;
    acc += w * h_norm(Gamma[k], p);
  }
  return acc;
}

TimeWeightedNorms time_weighted_norms(const std::vector<double>& times,
                                      const std::vector<DensityMatrix>& gamma,
                                      const std::vector<DensityMatrix>& zeta,
                                      const NormParams& p) {
  if (times.empty()) throw GridError("time_weighted_norms: empty trajectory");
  double T = times.back();
  if (p.lambda > 0.0 && p.kappa - p.lambda * T < 0.0)
    throw ScaleError("time_weighted_norms: kappa - lambda*T < 0");
  TimeWeightedNorms out;
  std::vector<double> zn(times.size(), 0.0);
  for (std::size_t i = 0; i < times.size(); ++i) {
    NormParams pt = p.with_kappa(p.kappa - p.lambda * times[i]);
    if (i < gamma.size()) out.sup_norm = std::max(out.sup_norm, h_norm(gamma[i], pt));
    if (i < zeta.size()) zn[i] = h_norm(zeta[i], pt);
  }
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    out.l1_norm += 0.5 * (zn[i] + zn[i + 1]) * (times[i + 1] - times[i]);
  return out;
}

}  // namespace wk
