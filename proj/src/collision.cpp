#include "wk/collision.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

#include "wk/constants.hpp"

namespace wk {

namespace {

std::size_t pow_sz(int base, int e) {
  std::size_t r = 1;
  while (e-- > 0) r *= static_cast<std::size_t>(base);
  return r;
}

// literal difference value of v-bins a-b per axis, wrapped to [-L_v, L_v)
double g_component(const GridSpec& g, int bin) { return freq_of_bin(bin, g.n) * g.dv(); }

bool kernel_truncates(const KernelModel& m) { return m.kind != KernelKind::Maxwell; }

}  // namespace

const CollisionTables& collision_tables(const GridSpec& g, const KernelModel& m,
                                        int n_omega_internal) {
  static std::map<std::string, CollisionTables> cache;
  static std::mutex mtx;
  if (n_omega_internal <= 0) n_omega_internal = g.d == 2 ? 512 : 64;
  char key[256];
  std::snprintf(key, sizeof key, "%d|%d|%.17g|%d|%.17g|%.17g|%d", g.d, g.n, g.L_x,
                static_cast<int>(m.kind), m.A, m.u_max, n_omega_internal);
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  CollisionTables T;
  T.grid = g;
  T.model = m;
  T.n_omega_internal = n_omega_internal;
  const int d = g.d, n = g.n;
  const std::size_t nv = pow_sz(n, d);
  SphereRule rule = sphere_rule(d, n_omega_internal);
  double umax = m.truncated() ? m.u_max : 0.0;

  T.k_loss.assign(nv, 0.0);
  T.k_gain = NdArray({static_cast<int>(nv), static_cast<int>(nv)});
  std::vector<std::vector<double>> gval(nv, std::vector<double>(d));
  std::vector<std::vector<double>> yval(nv, std::vector<double>(d));
  {
    std::vector<int> idx(d, 0);
    for (std::size_t f = 0; f < nv; ++f) {
      for (int a = 0; a < d; ++a) {
        gval[f][a] = g_component(g, idx[a]);
        yval[f][a] = freq_of_bin(idx[a], n) * g.dx();
      }
      for (int a = d - 1; a >= 0; --a) {
        if (++idx[a] < n) break;
        idx[a] = 0;
      }
    }
  }
  parallel_for(nv, [&](std::size_t gf) {
    const std::vector<double>& u = gval[gf];
    double r2 = 0.0;
    for (int a = 0; a < d; ++a) r2 += u[a] * u[a];
    double r = std::sqrt(r2);
    if (umax > 0.0 && r > umax) return;  // truncated kernel: rows stay zero
    cplx* grow = T.k_gain.data() + gf * nv;
    for (std::size_t w = 0; w < rule.nodes.size(); ++w) {
      const auto& om = rule.nodes[w];
      double wt = rule.weights[w];
      // gain and loss share the kernel argument b(|g|, w.ghat): the pair
      // indices are the pre-collision velocities in both terms
      double bl = b_eval(m, u, om);
      double bg = bl;
      T.k_loss[gf] += wt * bl;
      if (bg == 0.0) continue;
      double dot = 0.0;
      for (int a = 0; a < d; ++a) dot += om[a] * u[a];
      // phase -i (P_w g).y per rel node
      for (std::size_t yf = 0; yf < nv; ++yf) {
        double py = 0.0;
        for (int a = 0; a < d; ++a) py += om[a] * yval[yf][a];
        grow[yf] += wt * bg * std::polar(1.0, -dot * py);
      }
    }
  });
  // shift map: flat index of (k - g) mod n per axis
  T.shift_map.resize(nv * nv);
  {
    std::vector<int> gi(d), ki(d);
    for (std::size_t gf = 0; gf < nv; ++gf) {
      std::size_t rest = gf;
      for (int a = d - 1; a >= 0; --a) {
        gi[a] = static_cast<int>(rest % n);
        rest /= n;
      }
      for (std::size_t kf = 0; kf < nv; ++kf) {
        rest = kf;
        for (int a = d - 1; a >= 0; --a) {
          ki[a] = static_cast<int>(rest % n);
          rest /= n;
        }
        std::size_t out = 0;
        for (int a = 0; a < d; ++a) out = out * n + static_cast<std::size_t>((ki[a] - gi[a] + n) % n);
        T.shift_map[gf * nv + kf] = static_cast<int>(out);
      }
    }
  }
  return cache.emplace(key, std::move(T)).first->second;
}

namespace {

enum class BMode { Loss, Gain, Full };

// Core contraction: rows_out(s, r) = i dv^{2d} (-1)^{sum r} *
//   sum_g K(g,r) sum_k P_{s,g}(k) e^{2pi i k.r/n},
// with P_{s,g}(k) supplied per (s,g). K depends on the mode.
void contract_core(const GridSpec& g, const CollisionTables& T, BMode mode,
                   const std::function<void(std::size_t s, const int* shift_row_base, cplx* P,
                                            std::size_t gf)>& fill,
                   NdArray& rows_out) {
  const int d = g.d, n = g.n;
  const std::size_t nv = pow_sz(n, d);
  const std::size_t nmid = pow_sz(2 * n, d);
  const double scale = std::pow(g.dv(), 2 * d) * kCollisionPrefactorCorrection;
  // (-1)^{sum r} mask
  std::vector<double> sgn(nv);
  {
    std::vector<int> idx(d, 0);
    for (std::size_t f = 0; f < nv; ++f) {
      int s = 0;
      for (int a = 0; a < d; ++a) s += idx[a];
      sgn[f] = s % 2 == 0 ? 1.0 : -1.0;
      for (int a = d - 1; a >= 0; --a) {
        if (++idx[a] < n) break;
        idx[a] = 0;
      }
    }
  }
  parallel_for(nmid, [&](std::size_t s) {
    std::vector<cplx> buf(nv * nv);
    for (std::size_t gf = 0; gf < nv; ++gf)
      fill(s, T.shift_map.data() + gf * nv, buf.data() + gf * nv, gf);
    // batched backward FFT of each g-row over the d velocity axes
    if (d == 1) {
      fft_rows_backward(buf.data(), n, static_cast<int>(nv));
    } else {
      // each g-row is a d-dim unnormalized backward transform
      std::vector<int> shape(1 + d, n);
      shape[0] = static_cast<int>(nv);
      NdArray t2(shape);
      std::memcpy(t2.data(), buf.data(), nv * nv * sizeof(cplx));
      std::vector<int> axes(d);
      for (int a = 0; a < d; ++a) axes[a] = 1 + a;
      fft_unitary(t2, axes, +1);
      double us = std::pow(std::sqrt(static_cast<double>(n)), d);
      for (std::size_t i = 0; i < nv * nv; ++i) buf[i] = t2[i] * us;
    }
    cplx* out = rows_out.data() + s * nv;
    std::fill(out, out + nv, cplx{0, 0});
    for (std::size_t gf = 0; gf < nv; ++gf) {
      const cplx* row = buf.data() + gf * nv;
      if (mode == BMode::Loss) {
        double kl = T.k_loss[gf];
        if (kl == 0.0) continue;
        for (std::size_t r = 0; r < nv; ++r) out[r] += kl * row[r];
      } else if (mode == BMode::Gain) {
        const cplx* kg = T.k_gain.data() + gf * nv;
        for (std::size_t r = 0; r < nv; ++r) out[r] += kg[r] * row[r];
      } else {
        const cplx* kg = T.k_gain.data() + gf * nv;
        double kl = T.k_loss[gf];
        for (std::size_t r = 0; r < nv; ++r) out[r] += (kg[r] - kl) * row[r];
      }
    }
    const cplx unit(0.0, scale);  // i * dv^{2d}
    for (std::size_t r = 0; r < nv; ++r) out[r] *= unit * sgn[r];
  });
}

DensityMatrix b_pair(const DensityMatrix& g1, const DensityMatrix& g2, const KernelModel& m,
                     BMode mode) {
  if (!(g1.grid == g2.grid)) throw GridError("collision: grid mismatch");
  if (g1.k != 1 || g2.k != 1) throw GridError("collision: pair operators take k = 1");
  const GridSpec& g = g1.grid;
  if (m.truncated() && m.u_max > g.L_v + 1e-12)
    throw GridError("collision: model velocity truncation exceeds the grid");
  const CollisionTables& T = collision_tables(g, m);
  NdArray phi1 = mid_state(g1);
  NdArray phi2 = g1.data.data() == g2.data.data() ? phi1 : mid_state(g2);
  const int d = g.d, n = g.n;
  const std::size_t nv = pow_sz(n, d);
  std::vector<int> shape(2 * d);
  for (int a = 0; a < d; ++a) shape[a] = 2 * n;
  for (int a = 0; a < d; ++a) shape[d + a] = n;
  NdArray rows(shape);
  const cplx* p1 = phi1.data();
  const cplx* p2 = phi2.data();
  contract_core(g, T, mode,
                [&](std::size_t s, const int* shift, cplx* P, std::size_t) {
                  const cplx* r1 = p1 + s * nv;
                  const cplx* r2 = p2 + s * nv;
                  for (std::size_t k = 0; k < nv; ++k) P[k] = r1[k] * r2[shift[k]];
                },
                rows);
  return unfold_rows(g, rows);
}

}  // namespace

DensityMatrix b_loss(const DensityMatrix& g1, const DensityMatrix& g2, const KernelModel& m) {
  return b_pair(g1, g2, m, BMode::Loss);
}
DensityMatrix b_gain(const DensityMatrix& g1, const DensityMatrix& g2, const KernelModel& m) {
  return b_pair(g1, g2, m, BMode::Gain);
}
DensityMatrix b_full(const DensityMatrix& g1, const DensityMatrix& g2, const KernelModel& m) {
  return b_pair(g1, g2, m, BMode::Full);
}

cplx diag_sum(const DensityMatrix& gm) {
  const int d = gm.grid.d, n = gm.grid.n, k = gm.k;
  cplx acc{0, 0};
  std::vector<int> idx(2 * k * d, 0);
  // iterate diagonal X = X'
  std::vector<int> x(k * d, 0);
  while (true) {
    for (int a = 0; a < k * d; ++a) {
      idx[a] = x[a];
      idx[k * d + a] = x[a];
    }
    acc += gm.data.at(idx);
    int a = k * d - 1;
    for (; a >= 0; --a) {
      if (++x[a] < n) break;
      x[a] = 0;
    }
    if (a < 0) break;
  }
  return acc * std::pow(gm.grid.dx(), k * d);
}

// ---------------------------------------------------------------------------
// velocity-space route

namespace {

// v-spectrum coefficients: f(v) = sum_w c_w e^{i v.y_w}, y_w = freq(w) dx
std::vector<cplx> v_spectrum(const std::vector<cplx>& prof, const GridSpec& g) {
  const int d = g.d, n = g.n;
  const std::size_t nv = prof.size();
  std::vector<int> shape(d, n);
  NdArray a(shape);
  for (std::size_t i = 0; i < nv; ++i) a[i] = prof[i];
  std::vector<int> axes(d);
  for (int i = 0; i < d; ++i) axes[i] = i;
  // c_w = (1/n^d) sum_k f(k) e^{-i v_k.y_w}; v_k = (k-n/2) dv gives (-1)^w signs
  fft_unitary(a, axes, -1);
  double sc = std::pow(1.0 / std::sqrt(static_cast<double>(n)), d);
  std::vector<cplx> c(nv);
  std::vector<int> idx(d, 0);
  for (std::size_t f = 0; f < nv; ++f) {
    int s = 0;
    for (int i = 0; i < d; ++i) s += idx[i];
    c[f] = a[f] * sc * (s % 2 == 0 ? 1.0 : -1.0);
    for (int i = d - 1; i >= 0; --i) {
      if (++idx[i] < n) break;
      idx[i] = 0;
    }
  }
  return c;
}

}  // namespace

std::vector<cplx> q_profile(const std::vector<cplx>& gprof, const std::vector<cplx>& hprof,
                            const GridSpec& gr, const KernelModel& m, int n_omega, bool gain,
                            bool loss) {
  const int d = gr.d, n = gr.n;
  const std::size_t nv = pow_sz(n, d);
  if (gprof.size() != nv || hprof.size() != nv) throw GridError("q_profile: bad profile size");
  if (m.truncated() && m.u_max > gr.L_v + 1e-12)
    throw GridError("q_profile: model velocity truncation exceeds the grid");
  SphereRule rule = sphere_rule(d, n_omega);
  const double dvd = std::pow(gr.dv(), d);
  const double umax = m.truncated() ? m.u_max : std::numeric_limits<double>::infinity();

  // node coordinates
  std::vector<std::vector<double>> vco(nv, std::vector<double>(d));
  {
    std::vector<int> idx(d, 0);
    for (std::size_t f = 0; f < nv; ++f) {
      for (int a = 0; a < d; ++a) vco[f][a] = gr.v(idx[a]);
      for (int a = d - 1; a >= 0; --a) {
        if (++idx[a] < n) break;
        idx[a] = 0;
      }
    }
  }
  std::vector<cplx> out(nv, cplx{0, 0});

  if (loss) {
    // angular factor of the loss kernel per literal difference
    std::vector<cplx> hsum(nv, cplx{0, 0});
    parallel_for(nv, [&](std::size_t iv) {
      cplx acc{0, 0};
      std::vector<double> u(d);
      for (std::size_t jv = 0; jv < nv; ++jv) {
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
          u[a] = vco[iv][a] - vco[jv][a];
          r2 += u[a] * u[a];
        }
        if (std::sqrt(r2) > umax) continue;
        double ang = 0.0;
        for (std::size_t w = 0; w < rule.nodes.size(); ++w)
          ang += rule.weights[w] * b_eval(m, u, rule.nodes[w]);
        acc += ang * hprof[jv];
      }
      hsum[iv] = acc * dvd;
    });
    for (std::size_t iv = 0; iv < nv; ++iv) out[iv] -= gprof[iv] * hsum[iv];
  }

  if (gain) {
    std::vector<cplx> cg = v_spectrum(gprof, gr);
    std::vector<cplx> ch = v_spectrum(hprof, gr);
    // y_w values
    std::vector<std::vector<double>> yco(nv, std::vector<double>(d));
    {
      std::vector<int> idx(d, 0);
      for (std::size_t f = 0; f < nv; ++f) {
        for (int a = 0; a < d; ++a) yco[f][a] = freq_of_bin(idx[a], n) * gr.dx();
        for (int a = d - 1; a >= 0; --a) {
          if (++idx[a] < n) break;
          idx[a] = 0;
        }
      }
    }
    // lattice phase table L(v,w) = e^{i v.y_w}
    std::vector<cplx> L(nv * nv);
    for (std::size_t iv = 0; iv < nv; ++iv)
      for (std::size_t w = 0; w < nv; ++w) {
        double ph = 0.0;
        for (int a = 0; a < d; ++a) ph += vco[iv][a] * yco[w][a];
        L[iv * nv + w] = std::polar(1.0, ph);
      }
    std::vector<cplx> gainacc(nv, cplx{0, 0});
    for (std::size_t w = 0; w < rule.nodes.size(); ++w) {
      const auto& om = rule.nodes[w];
      double wt = rule.weights[w];
      // Tpar(v,w) = e^{i (om.v)(om.y_w)}
      std::vector<double> aV(nv), bW(nv);
      for (std::size_t iv = 0; iv < nv; ++iv) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) s += om[a] * vco[iv][a];
        aV[iv] = s;
      }
      for (std::size_t yw = 0; yw < nv; ++yw) {
        double s = 0.0;
        for (int a = 0; a < d; ++a) s += om[a] * yco[yw][a];
        bW[yw] = s;
      }
      std::vector<cplx> Tpar(nv * nv), D1(nv * nv), D2(nv * nv);
      for (std::size_t iv = 0; iv < nv; ++iv)
        for (std::size_t yw = 0; yw < nv; ++yw) {
          cplx t = std::polar(1.0, aV[iv] * bW[yw]);
          Tpar[iv * nv + yw] = t;
          D1[iv * nv + yw] = cg[yw] * L[iv * nv + yw] * std::conj(t);  // e^{i v-perp . y}
          D2[iv * nv + yw] = ch[yw] * L[iv * nv + yw] * std::conj(t);
        }
      // F1(v,v2) = f(v-perp + v2-par) = sum_w D1(v,w) Tpar(v2,w)
      // F2(v,v2) = h(v2-perp + v-par) = sum_w D2(v2,w) Tpar(v,w)
      parallel_for(nv, [&](std::size_t iv) {
        std::vector<double> u(d);
        cplx acc{0, 0};
        for (std::size_t jv = 0; jv < nv; ++jv) {
          double r2 = 0.0, dot = 0.0;
          for (int a = 0; a < d; ++a) {
            u[a] = vco[iv][a] - vco[jv][a];
            r2 += u[a] * u[a];
            dot += om[a] * u[a];
          }
          if (std::sqrt(r2) > umax) continue;
          double b = b_eval(m, u, om);
          if (b == 0.0) continue;
          // post-collision velocities outside the box contribute zero: the
          // interpolant is only trusted on the velocity domain itself
          bool outside = false;
          for (int a = 0; a < d; ++a) {
            double vs = vco[iv][a] - dot * om[a];   // v* component
            double v2s = vco[jv][a] + dot * om[a];  // v2* component
            if (vs < -gr.L_v || vs >= gr.L_v || v2s < -gr.L_v || v2s >= gr.L_v) outside = true;
          }
          if (outside) continue;
          const cplx* d1 = D1.data() + iv * nv;
          const cplx* d2 = D2.data() + jv * nv;
          const cplx* t2 = Tpar.data() + jv * nv;
          const cplx* t1 = Tpar.data() + iv * nv;
          cplx f1{0, 0}, f2{0, 0};
          for (std::size_t yw = 0; yw < nv; ++yw) {
            f1 += d1[yw] * t2[yw];
            f2 += d2[yw] * t1[yw];
          }
          acc += b * f1 * f2;
        }
        gainacc[iv] += wt * acc * dvd;
      });
    }
    for (std::size_t iv = 0; iv < nv; ++iv) out[iv] += gainacc[iv];
  }
  return out;
}

namespace {

PhaseField q_assemble(const PhaseField& f, const KernelModel& m, int n_omega, bool gain,
                      bool loss) {
  const GridSpec& g = f.grid;
  const int d = g.d, n = g.n;
  const std::size_t nx = pow_sz(n, d), nv = pow_sz(n, d);
  PhaseField out(g);
  // x-mode decomposition: if few position modes carry energy, assemble the
  // bilinear profile sums mode by mode (pointwise identical to the direct
  // per-x evaluation, and much cheaper for band-limited test data)
  std::vector<int> xaxes(d);
  for (int a = 0; a < d; ++a) xaxes[a] = a;
  NdArray fx = dft(f.data, xaxes, FftDir::Forward);
  double total = fx.norm2();
  std::vector<std::size_t> active;
  for (std::size_t mx = 0; mx < nx; ++mx) {
    double e = 0.0;
    const cplx* row = fx.data() + mx * nv;
    for (std::size_t k = 0; k < nv; ++k) e += std::norm(row[k]);
    if (std::sqrt(e) > 1e-14 * total) active.push_back(mx);
  }
  if (active.size() <= 8 && active.size() >= 1) {
    // profiles g_m(v) with f = sum_m e^{i xi_m . x} g_m(v); the unitary DFT
    // indexes samples from x = -L, so a (-1)^m centering phase appears
    double us = std::pow(std::sqrt(static_cast<double>(n)), -d);
    auto mode_sign = [&](std::size_t mf) {
      int s = 0;
      for (int a = 0; a < d; ++a) {
        s += static_cast<int>(mf % n);
        mf /= n;
      }
      return s % 2 == 0 ? 1.0 : -1.0;
    };
    std::map<std::size_t, std::vector<cplx>> qsums;  // output x-mode -> profile
    for (std::size_t ia = 0; ia < active.size(); ++ia)
      for (std::size_t ib = 0; ib < active.size(); ++ib) {
        std::vector<cplx> pa(nv), pb(nv);
        const cplx* ra = fx.data() + active[ia] * nv;
        const cplx* rb = fx.data() + active[ib] * nv;
        double sa = mode_sign(active[ia]) * us, sb = mode_sign(active[ib]) * us;
        for (std::size_t k = 0; k < nv; ++k) {
          pa[k] = ra[k] * sa;
          pb[k] = rb[k] * sb;
        }
        std::vector<cplx> q = q_profile(pa, pb, g, m, n_omega, gain, loss);
        // product mode: bins add mod n per axis
        std::size_t ma = active[ia], mb = active[ib], mo = 0;
        std::size_t ta = ma, tb = mb;
        std::vector<int> oa(d);
        for (int a = d - 1; a >= 0; --a) {
          oa[a] = static_cast<int>((ta % n + tb % n) % n);
          ta /= n;
          tb /= n;
        }
        for (int a = 0; a < d; ++a) mo = mo * n + static_cast<std::size_t>(oa[a]);
        auto& acc = qsums[mo];
        if (acc.empty()) acc.assign(nv, cplx{0, 0});
        for (std::size_t k = 0; k < nv; ++k) acc[k] += q[k];
      }
    // assemble on the lattice
    std::vector<int> idx(d, 0);
    std::vector<std::vector<double>> xco(nx, std::vector<double>(d));
    for (std::size_t jx = 0; jx < nx; ++jx) {
      for (int a = 0; a < d; ++a) xco[jx][a] = g.x(idx[a]);
      for (int a = d - 1; a >= 0; --a) {
        if (++idx[a] < n) break;
        idx[a] = 0;
      }
    }
    for (const auto& [mo, prof] : qsums) {
      std::size_t t = mo;
      std::vector<double> xi(d);
      for (int a = d - 1; a >= 0; --a) {
        xi[a] = g.xi(static_cast<int>(t % n));
        t /= n;
      }
      parallel_for(nx, [&](std::size_t jx) {
        double ph = 0.0;
        for (int a = 0; a < d; ++a) ph += xi[a] * xco[jx][a];
        cplx e = std::polar(1.0, ph);
        cplx* orow = out.data.data() + jx * nv;
        for (std::size_t k = 0; k < nv; ++k) orow[k] += e * prof[k];
      });
    }
  } else {
    for (std::size_t jx = 0; jx < nx; ++jx) {
      std::vector<cplx> prof(nv);
      const cplx* row = f.data.data() + jx * nv;
      for (std::size_t k = 0; k < nv; ++k) prof[k] = row[k];
      std::vector<cplx> q = q_profile(prof, prof, g, m, n_omega, gain, loss);
      cplx* orow = out.data.data() + jx * nv;
      for (std::size_t k = 0; k < nv; ++k) orow[k] = q[k];
    }
  }
  if (f.real_flag) out.set_real_flag(1e-10);
  return out;
}

}  // namespace

PhaseField q_classical(const PhaseField& f, const KernelModel& m, int n_omega) {
  if (!f.real_flag && f.imag_residual() > 1e-10 * std::max(1e-300, f.data.max_abs()))
    throw GridError("q_classical: f must be real-flagged");
  return q_assemble(f, m, n_omega, true, true);
}

PhaseField q_classical_part(const PhaseField& f, const KernelModel& m, int n_omega, bool gain) {
  return q_assemble(f, m, n_omega, gain, !gain);
}

// ---------------------------------------------------------------------------
// hierarchy operator

namespace {

// mid/velocity transform of one particle's axis pair inside a larger tensor:
// x-axes of that particle become mids (2n), primed axes become v bins (n).
NdArray midv_particle(const NdArray& a, const GridSpec& g, const std::vector<int>& xaxes,
                      const std::vector<int>& paxes) {
  const int d = g.d, n = g.n;
  // 1. fold: reindex (a_i, b_i) -> (s_i, r_i)
  std::vector<int> oshape = a.shape();
  for (int i = 0; i < d; ++i) oshape[xaxes[i]] = 2 * n;
  NdArray folded(oshape);
  {
    std::vector<int> idx(a.rank()), fidx(a.rank());
    for (std::size_t flat = 0; flat < a.size(); ++flat) {
      std::size_t rest = flat;
      for (int ax = a.rank() - 1; ax >= 0; --ax) {
        idx[ax] = static_cast<int>(rest % a.shape()[ax]);
        rest /= a.shape()[ax];
      }
      fidx = idx;
      for (int i = 0; i < d; ++i) {
        FoldIdx fo = fold_axis(idx[xaxes[i]], idx[paxes[i]], n);
        fidx[xaxes[i]] = fo.s;
        fidx[paxes[i]] = fo.r;
      }
      folded.at(fidx) = a[flat];
    }
  }
  // 2. refill along each mid axis
  for (int i = 0; i < d; ++i) {
    int sax = xaxes[i], rax = paxes[i];
    NdArray full = folded;
    std::size_t s_stride = folded.stride(sax);
    std::size_t r_stride = folded.stride(rax);
    std::vector<std::size_t> base;
    const auto& shp = folded.shape();
    std::function<void(int, std::size_t)> rec = [&](int ax, std::size_t off) {
      if (ax == folded.rank()) {
        base.push_back(off);
        return;
      }
      if (ax == sax) {
        rec(ax + 1, off);
        return;
      }
      for (int t = 0; t < shp[ax]; ++t) rec(ax + 1, off + t * folded.stride(ax));
    };
    rec(0, 0);
    parallel_for(base.size(), [&](std::size_t li) {
      std::size_t off = base[li];
      std::size_t rpos = (off / r_stride) % static_cast<std::size_t>(n);
      int eps = static_cast<int>(rpos % 2);
      NdArray tmp(std::vector<int>{n});
      for (int j = 0; j < n; ++j) tmp[j] = folded[off + static_cast<std::size_t>(2 * j + eps) * s_stride];
      fft_unitary(tmp, {0}, -1);
      std::vector<cplx> spec2(2 * n, cplx{0, 0});
      for (int mm = 0; mm < n; ++mm) {
        int fr = freq_of_bin(mm, n);
        spec2[bin_of_freq(fr, 2 * n)] = tmp[mm] * std::polar(1.0, -kPi * fr * eps / n);
      }
      NdArray t2(std::vector<int>{2 * n});
      for (int s = 0; s < 2 * n; ++s) t2[s] = spec2[s];
      fft_unitary(t2, {0}, +1);
      double sc = std::sqrt(2.0);
      for (int s = 0; s < 2 * n; ++s) full[off + static_cast<std::size_t>(s) * s_stride] = t2[s] * sc;
    });
    folded = std::move(full);
  }
  // 3. rel -> velocity with sign mask and scale
  {
    std::vector<int> idx(folded.rank());
    for (std::size_t flat = 0; flat < folded.size(); ++flat) {
      std::size_t rest = flat;
      int s = 0;
      for (int ax = folded.rank() - 1; ax >= 0; --ax) {
        int v = static_cast<int>(rest % folded.shape()[ax]);
        rest /= folded.shape()[ax];
        for (int i = 0; i < d; ++i)
          if (ax == paxes[i]) s += v;
      }
      if (s % 2 != 0) folded[flat] = -folded[flat];
    }
  }
  fft_unitary(folded, paxes, -1);
  folded *= std::pow(1.0 / (std::sqrt(static_cast<double>(n)) * g.dv()), d);
  return folded;
}

}  // namespace

DensityMatrix b_hierarchy(int i, int k, const DensityMatrix& state, const KernelModel& m) {
  if (state.k != k + 1) throw GridError("b_hierarchy: state must have k+1 particles");
  if (i < 1 || i > k) throw GridError("b_hierarchy: index out of range");
  const GridSpec& g = state.grid;
  const int d = g.d, n = g.n;
  if (state.data.size() * (1ull << d) > (1ull << 27))
    throw GridError("b_hierarchy: full-grid tensor too large; use the lazy route");
  const int kp1 = k + 1;
  const int pi = i - 1, pc = k;  // 0-based particle slots
  std::vector<int> xi(d), ppi(d), xc(d), ppc(d);
  for (int a = 0; a < d; ++a) {
    xi[a] = pi * d + a;
    ppi[a] = kp1 * d + pi * d + a;
    xc[a] = pc * d + a;
    ppc[a] = kp1 * d + pc * d + a;
  }
  NdArray t1 = midv_particle(state.data, g, xi, ppi);
  NdArray t2 = midv_particle(t1, g, xc, ppc);
  // t2 axes: particle i -> (s_i at xi, v_i at ppi), particle c -> (s_c, v_c)
  const std::size_t nv = pow_sz(n, d);
  const std::size_t nmid = pow_sz(2 * n, d);
  const CollisionTables& T = collision_tables(g, m);
  // spectators: all axes except the two transformed particle blocks
  std::vector<int> spect_axes;
  for (int ax = 0; ax < t2.rank(); ++ax) {
    bool skip = false;
    for (int a = 0; a < d; ++a)
      if (ax == xi[a] || ax == ppi[a] || ax == xc[a] || ax == ppc[a]) skip = true;
    if (!skip) spect_axes.push_back(ax);
  }
  std::size_t nspect = 1;
  for (int ax : spect_axes) nspect *= static_cast<std::size_t>(t2.shape()[ax]);
  // diagonal slice D(spect; s; v_i; v_c), s shared between the two particles
  // output rows R(spect; s; r) -> unfold into the k-particle tensor
  DensityMatrix out(g, k);
  std::vector<int> sp_idx(spect_axes.size(), 0);
  std::vector<int> t2idx(t2.rank(), 0);
  for (std::size_t sp = 0; sp < nspect; ++sp) {
    // decode spectator indices
    {
      std::size_t rest = sp;
      for (int a = static_cast<int>(spect_axes.size()) - 1; a >= 0; --a) {
        sp_idx[a] = static_cast<int>(rest % t2.shape()[spect_axes[a]]);
        rest /= t2.shape()[spect_axes[a]];
      }
    }
    // gather D for this spectator block
    NdArray D(std::vector<int>{static_cast<int>(nmid), static_cast<int>(nv), static_cast<int>(nv)});
    for (std::size_t sa = 0; sa < spect_axes.size(); ++sa) t2idx[spect_axes[sa]] = sp_idx[sa];
    std::vector<int> sdig(d), vi(d), vc(d);
    for (std::size_t s = 0; s < nmid; ++s) {
      std::size_t rest = s;
      for (int a = d - 1; a >= 0; --a) {
        sdig[a] = static_cast<int>(rest % (2 * n));
        rest /= (2 * n);
      }
      for (std::size_t a1 = 0; a1 < nv; ++a1) {
        rest = a1;
        for (int a = d - 1; a >= 0; --a) {
          vi[a] = static_cast<int>(rest % n);
          rest /= n;
        }
        for (std::size_t a2 = 0; a2 < nv; ++a2) {
          rest = a2;
          for (int a = d - 1; a >= 0; --a) {
            vc[a] = static_cast<int>(rest % n);
            rest /= n;
          }
          for (int a = 0; a < d; ++a) {
            t2idx[xi[a]] = sdig[a];
            t2idx[xc[a]] = sdig[a];
            t2idx[ppi[a]] = vi[a];
            t2idx[ppc[a]] = vc[a];
          }
          D.at({static_cast<int>(s), static_cast<int>(a1), static_cast<int>(a2)}) = t2.at(t2idx);
        }
      }
    }
    std::vector<int> rshape(2 * d);
    for (int a = 0; a < d; ++a) rshape[a] = 2 * n;
    for (int a = 0; a < d; ++a) rshape[d + a] = n;
    NdArray rows(rshape);
    contract_core(g, T, BMode::Full,
                  [&](std::size_t s, const int* shift, cplx* P, std::size_t) {
                    const cplx* base = D.data() + s * nv * nv;
                    for (std::size_t kk = 0; kk < nv; ++kk) P[kk] = base[kk * nv + shift[kk]];
                  },
                  rows);
    // unfold the (s, r) rows into (x_i, x_i') and write into the output at
    // this spectator block
    std::vector<int> oidx(2 * k * d);
    // spectator axes of the output: particles != i keep their positions
    // mapping: output axes for particle p<i or i<p<=k-?; we removed particle c=k
    // spect_axes refer to t2 (k+1 particles); translate to out (k particles)
    std::vector<int> sp_out;
    for (int ax : spect_axes) {
      int part = (ax % (kp1 * d)) / d;  // particle slot in t2
      bool primed = ax >= kp1 * d;
      int a = ax % d;
      // particle slots in out: same index (c = k is never a spectator)
      sp_out.push_back((primed ? k * d : 0) + part * d + a);
    }
    std::vector<int> ab(2 * d);
    for (std::size_t fa = 0; fa < pow_sz(n, 2 * d); ++fa) {
      std::size_t rest = fa;
      for (int a = 2 * d - 1; a >= 0; --a) {
        ab[a] = static_cast<int>(rest % n);
        rest /= n;
      }
      std::vector<int> fidx(2 * d);
      for (int a = 0; a < d; ++a) {
        FoldIdx fo = fold_axis(ab[a], ab[d + a], n);
        fidx[a] = fo.s;
        fidx[d + a] = fo.r;
      }
      for (std::size_t sa = 0; sa < sp_out.size(); ++sa) oidx[sp_out[sa]] = sp_idx[sa];
      for (int a = 0; a < d; ++a) {
        oidx[pi * d + a] = ab[a];
        oidx[k * d + pi * d + a] = ab[d + a];
      }
      out.data.at(oidx) = rows.at(fidx);
    }
  }
  return out;
}

DensityMatrix b_hierarchy(int i, int k, const LazyTensorState& state, const KernelModel& m) {
  if (state.k != k + 1) throw GridError("b_hierarchy: state must have k+1 particles");
  if (i < 1 || i > k) throw GridError("b_hierarchy: index out of range");
  if (state.factors.empty())
    throw GridError("b_hierarchy: lazy route requires a factorized state");
  // factorized: spectators pass through, the (i, k+1) pair contracts to
  // b_full(factor_i, factor_{k+1})
  DensityMatrix pair = b_full(state.factors[i - 1], state.factors[k], m);
  DensityMatrix out = (i == 1) ? pair : state.factors[0];
  for (int p = 1; p < k; ++p) out = tensor_product(out, p == i - 1 ? pair : state.factors[p]);
  return out;
}

}  // namespace wk
