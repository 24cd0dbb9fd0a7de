#include "wk/wigner.hpp"

#include <cmath>
#include <random>

namespace wk {

FoldIdx fold_axis(int a, int b, int n) {
  int raw = a - b;
  int branch = 0;
  if (raw >= n / 2) {
    raw -= n;
    branch = 1;
  } else if (raw < -n / 2) {
    raw += n;
    branch = 1;
  }
  FoldIdx f;
  f.s = (a + b + branch * n) % (2 * n);
  f.r = raw >= 0 ? raw : raw + n;
  return f;
}

void unfold_axis(int s, int r, int n, int& a, int& b) {
  int rel = freq_of_bin(r, n);
  a = ((s + rel) / 2 % n + n) % n;
  b = ((s - rel) / 2 % n + n) % n;
}

NdArray upsample_x2_axis(const NdArray& a, int axis, int eps) {
  const auto& shape = a.shape();
  int n = shape[axis];
  NdArray spec = dft(a, {axis}, FftDir::Forward);
  std::vector<int> oshape = shape;
  oshape[axis] = 2 * n;
  NdArray out(oshape);
  // place mode m at the same signed frequency on the 2n lattice, with the
  // offset phase referencing samples to s = 2j + eps
  std::size_t in_stride = spec.stride(axis);
  std::size_t out_stride = out.stride(axis);
  std::size_t in_block = in_stride * static_cast<std::size_t>(n);
  std::size_t out_block = out_stride * static_cast<std::size_t>(2 * n);
  std::size_t nblocks = spec.size() / in_block;
  std::vector<cplx> phase(n);
  for (int m = 0; m < n; ++m) {
    double ph = -kPi * freq_of_bin(m, n) * eps / n;
    phase[m] = std::polar(1.0, ph);
  }
  for (std::size_t blk = 0; blk < nblocks; ++blk) {
    for (std::size_t inner = 0; inner < in_stride; ++inner) {
      const cplx* src = spec.data() + blk * in_block + inner;
      cplx* dst = out.data() + blk * out_block + inner;
      for (int m = 0; m < n; ++m) {
        int slot = bin_of_freq(freq_of_bin(m, n), 2 * n);
        dst[static_cast<std::size_t>(slot) * out_stride] = src[static_cast<std::size_t>(m) * in_stride] * phase[m];
      }
    }
  }
  fft_unitary(out, {axis}, +1);
  // unitary pair uses 1/sqrt(2n) on the way back; we want (1/sqrt n) sum
  out *= std::sqrt(2.0);
  return out;
}

namespace {

// parity mask (-1)^{sum of rel bins} applied over the trailing d axes
void apply_rel_sign(NdArray& rows, int d, int n) {
  std::size_t vsize = 1;
  for (int i = 0; i < d; ++i) vsize *= n;
  std::size_t nrows = rows.size() / vsize;
  std::vector<double> sign(vsize);
  for (std::size_t f = 0; f < vsize; ++f) {
    std::size_t rest = f;
    int s = 0;
    for (int i = d - 1; i >= 0; --i) {
      s += rest % n;
      rest /= n;
    }
    sign[f] = (s % 2 == 0) ? 1.0 : -1.0;
  }
  for (std::size_t rw = 0; rw < nrows; ++rw) {
    cplx* p = rows.data() + rw * vsize;
    for (std::size_t f = 0; f < vsize; ++f) p[f] *= sign[f];
  }
}

}  // namespace

DensityMatrix inverse_wigner(const PhaseField& f) {
  const GridSpec& g = f.grid;
  const int d = g.d, n = g.n;
  // mid-state: upsample each position axis by 2
  NdArray M = f.data;
  for (int ax = 0; ax < d; ++ax) M = upsample_x2_axis(M, ax, 0);
  // rel rows: gammatilde(s, r) = dv^d (-1)^{sum r} sum_k M(s,k) e^{2pi i k.r/n}
  std::vector<int> vaxes(d);
  for (int i = 0; i < d; ++i) vaxes[i] = d + i;
  fft_unitary(M, vaxes, +1);
  M *= std::pow(std::sqrt(static_cast<double>(n)) * g.dv(), d);
  apply_rel_sign(M, d, n);
  DensityMatrix out = unfold_rows(g, M);
  if (f.real_flag) out.hermitian_flag = hermitian_check(out) <= 1e-12 * std::max(1e-300, out.data.max_abs());
  return out;
}

DensityMatrix unfold_rows(const GridSpec& g, const NdArray& rows) {
  const int d = g.d, n = g.n;
  DensityMatrix out(g, 1);
  std::vector<int> ab(2 * d), sr(2 * d);
  std::size_t total = out.data.size();
  parallel_for(total, [&](std::size_t flat) {
    std::size_t rest = flat;
    std::vector<int> idx(2 * d);
    for (int a = 2 * d - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rest % n);
      rest /= n;
    }
    std::vector<int> fidx(2 * d);
    for (int i = 0; i < d; ++i) {
      FoldIdx fo = fold_axis(idx[i], idx[d + i], n);
      fidx[i] = fo.s;
      fidx[d + i] = fo.r;
    }
    out.data[flat] = rows.at(fidx);
  });
  return out;
}

NdArray mid_state(const DensityMatrix& gm) {
  if (gm.k != 1) throw GridError("mid_state: k must be 1");
  const GridSpec& g = gm.grid;
  const int d = g.d, n = g.n;
  // fold into rows(s, r); refill invalid-parity mids per axis from the
  // band-limited upsample, axis by axis.
  std::vector<int> shape(2 * d);
  for (int i = 0; i < d; ++i) shape[i] = 2 * n;
  for (int i = 0; i < d; ++i) shape[d + i] = n;
  NdArray rows(shape);
  std::vector<char> known(rows.size(), 0);
  {
    std::vector<int> idx(2 * d), fidx(2 * d);
    for (std::size_t flat = 0; flat < gm.data.size(); ++flat) {
      std::size_t rest = flat;
      for (int a = 2 * d - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(rest % n);
        rest /= n;
      }
      for (int i = 0; i < d; ++i) {
        FoldIdx fo = fold_axis(idx[i], idx[d + i], n);
        fidx[i] = fo.s;
        fidx[d + i] = fo.r;
      }
      std::size_t f = rows.flat(fidx);
      rows[f] = gm.data[flat];
      known[f] = 1;
    }
  }
  // refill: process mid axes one at a time; after axis i is refilled, all
  // parities of s_i are valid. A slice along s_i at fixed r_i has samples at
  // s_i == parity(r_i) (mod 2) before refill.
  for (int i = 0; i < d; ++i) {
    NdArray full = rows;
    std::size_t s_stride = rows.stride(i);
    std::size_t r_stride = rows.stride(d + i);
    // iterate over all lines along s_i for each r_i
    std::vector<int> idx(2 * d, 0);
    const auto& shp = rows.shape();
    std::size_t nlines = rows.size() / static_cast<std::size_t>(2 * n);
    std::vector<std::size_t> base_offsets;
    base_offsets.reserve(nlines);
    // enumerate index tuples with s_i == 0
    std::function<void(int, std::size_t)> rec = [&](int ax, std::size_t off) {
      if (ax == 2 * d) {
        base_offsets.push_back(off);
        return;
      }
      if (ax == i) {
        rec(ax + 1, off);
        return;
      }
      for (int t = 0; t < shp[ax]; ++t) rec(ax + 1, off + t * rows.stride(ax));
    };
    rec(0, 0);
    parallel_for(base_offsets.size(), [&](std::size_t li) {
      std::size_t off = base_offsets[li];
      // recover r_i of this line to know the parity offset
      std::size_t rpos = (off / r_stride) % static_cast<std::size_t>(n);
      int eps = static_cast<int>(rpos % 2);
      // gather the n known samples g(j) = rows(2j+eps)
      std::vector<cplx> line(n);
      for (int j = 0; j < n; ++j) line[j] = rows[off + static_cast<std::size_t>(2 * j + eps) * s_stride];
      // n-point unitary forward FFT
      NdArray tmp(std::vector<int>{n});
      for (int j = 0; j < n; ++j) tmp[j] = line[j];
      fft_unitary(tmp, {0}, -1);
      // evaluate on the full 2n lattice
      std::vector<cplx> spec2(2 * n, cplx{0, 0});
      for (int m = 0; m < n; ++m) {
        int fr = freq_of_bin(m, n);
        cplx ph = std::polar(1.0, -kPi * fr * eps / n);
        spec2[bin_of_freq(fr, 2 * n)] = tmp[m] * ph;
      }
      NdArray t2(std::vector<int>{2 * n});
      for (int s = 0; s < 2 * n; ++s) t2[s] = spec2[s];
      fft_unitary(t2, {0}, +1);
      double sc = std::sqrt(2.0);
      for (int s = 0; s < 2 * n; ++s) full[off + static_cast<std::size_t>(s) * s_stride] = t2[s] * sc;
    });
    rows = std::move(full);
  }
  // rel rows -> velocity: f~(s,k) = (1/(n^d dv^d)) sum_r (-1)^{sum r} rows e^{-2pi i k.r/n}
  apply_rel_sign(rows, d, n);
  std::vector<int> vaxes(d);
  for (int i = 0; i < d; ++i) vaxes[i] = d + i;
  fft_unitary(rows, vaxes, -1);
  rows *= std::pow(1.0 / (std::sqrt(static_cast<double>(n)) * gm.grid.dv()), d);
  return rows;
}

PhaseField wigner(const DensityMatrix& gm) {
  if (gm.k != 1) throw GridError("wigner: k must be 1");
  const GridSpec& g = gm.grid;
  const int d = g.d, n = g.n;
  // sector solve, axis pair by axis pair; processed pairs become (x, v)
  NdArray cur = gm.data;  // axes: processed.. (a_i, b_i) at (i, d+i)
  for (int i = 0; i < d; ++i) {
    const double dv = g.dv();
    NdArray next = cur;
    std::size_t a_str = cur.stride(i);
    std::size_t b_str = cur.stride(d + i);
    // enumerate all offsets with a_i = b_i = 0
    std::vector<std::size_t> base;
    const auto& shp = cur.shape();
    std::function<void(int, std::size_t)> rec = [&](int ax, std::size_t off) {
      if (ax == cur.rank()) {
        base.push_back(off);
        return;
      }
      if (ax == i || ax == d + i) {
        rec(ax + 1, off);
        return;
      }
      for (int t = 0; t < shp[ax]; ++t) rec(ax + 1, off + t * cur.stride(ax));
    };
    rec(0, 0);
    int nh = n / 2;
    parallel_for(base.size(), [&](std::size_t li) {
      std::size_t off = base[li];
      // fold the (a,b) plane into G(s,r) = (-1)^r gamma_fold / dv
      std::vector<cplx> G(static_cast<std::size_t>(2 * n) * n, cplx{0, 0});
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          FoldIdx fo = fold_axis(a, b, n);
          double sg = (fo.r % 2 == 0) ? 1.0 : -1.0;
          G[static_cast<std::size_t>(fo.s) * n + fo.r] =
              cur[off + a * a_str + b * b_str] * (sg / dv);
        }
      // even sector: E(j, rho) = G(2j, 2rho) -> A(j,kap) via n/2-point DFT
      // odd sector:  O(j, rho) = G(2j+1, 2rho+1) -> C(j,kap)
      std::vector<cplx> A(static_cast<std::size_t>(n) * nh), D(static_cast<std::size_t>(n) * nh);
      NdArray buf(std::vector<int>{nh});
      for (int j = 0; j < n; ++j) {
        for (int rho = 0; rho < nh; ++rho) buf[rho] = G[static_cast<std::size_t>(2 * j) * n + 2 * rho];
        fft_unitary(buf, {0}, -1);
        double sc = std::sqrt(static_cast<double>(nh)) * 2.0 / n;  // (2/n) sum
        for (int kap = 0; kap < nh; ++kap) A[static_cast<std::size_t>(j) * nh + kap] = buf[kap] * sc;
        for (int rho = 0; rho < nh; ++rho) buf[rho] = G[static_cast<std::size_t>(2 * j + 1) * n + ((2 * rho + 1) % n)];
        fft_unitary(buf, {0}, -1);
        for (int kap = 0; kap < nh; ++kap) {
          cplx w = std::polar(1.0, -2.0 * kPi * kap / n);  // omega^{-kap}
          D[static_cast<std::size_t>(j) * nh + kap] = buf[kap] * sc * w;
        }
      }
      // undo the half-step shift on D along j, per kap
      NdArray col(std::vector<int>{n});
      for (int kap = 0; kap < nh; ++kap) {
        for (int j = 0; j < n; ++j) col[j] = D[static_cast<std::size_t>(j) * nh + kap];
        fft_unitary(col, {0}, -1);
        for (int m = 0; m < n; ++m) col[m] *= std::polar(1.0, -kPi * freq_of_bin(m, n) / n);
        fft_unitary(col, {0}, +1);
        for (int j = 0; j < n; ++j) D[static_cast<std::size_t>(j) * nh + kap] = col[j];
      }
      // assemble f(j, k)
      for (int j = 0; j < n; ++j)
        for (int kap = 0; kap < nh; ++kap) {
          cplx a_ = A[static_cast<std::size_t>(j) * nh + kap];
          cplx d_ = D[static_cast<std::size_t>(j) * nh + kap];
          next[off + j * a_str + static_cast<std::size_t>(kap) * b_str] = 0.5 * (a_ + d_);
          next[off + j * a_str + static_cast<std::size_t>(kap + nh) * b_str] = 0.5 * (a_ - d_);
        }
    });
    cur = std::move(next);
  }
  PhaseField f(g);
  f.data = std::move(cur);
  f.set_real_flag();
  return f;
}

double hermitian_check(const DensityMatrix& gm) {
  const int d = gm.grid.d, n = gm.grid.n, k = gm.k;
  double m = 0.0;
  std::vector<int> idx(2 * k * d), swp(2 * k * d);
  for (std::size_t flat = 0; flat < gm.data.size(); ++flat) {
    std::size_t rest = flat;
    for (int a = 2 * k * d - 1; a >= 0; --a) {
      idx[a] = static_cast<int>(rest % n);
      rest /= n;
    }
    for (int a = 0; a < k * d; ++a) {
      swp[a] = idx[k * d + a];
      swp[k * d + a] = idx[a];
    }
    cplx diff = gm.data[flat] - std::conj(gm.data.at(swp));
    m = std::max(m, std::abs(diff));
  }
  return m;
}

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b) {
  if (!(a.grid == b.grid)) throw GridError("tensor_product: grid mismatch");
  const int d = a.grid.d, n = a.grid.n;
  DensityMatrix out(a.grid, a.k + b.k);
  const int ka = a.k, kb = b.k, k = ka + kb;
  std::vector<int> idx(2 * k * d), ia(2 * ka * d), ib(2 * kb * d);
  for (std::size_t flat = 0; flat < out.data.size(); ++flat) {
    std::size_t rest = flat;
    for (int ax = 2 * k * d - 1; ax >= 0; --ax) {
      idx[ax] = static_cast<int>(rest % n);
      rest /= n;
    }
    for (int ax = 0; ax < ka * d; ++ax) {
      ia[ax] = idx[ax];
      ia[ka * d + ax] = idx[k * d + ax];
    }
    for (int ax = 0; ax < kb * d; ++ax) {
      ib[ax] = idx[ka * d + ax];
      ib[kb * d + ax] = idx[k * d + ka * d + ax];
    }
    out.data[flat] = a.data.at(ia) * b.data.at(ib);
  }
  out.hermitian_flag = a.hermitian_flag && b.hermitian_flag;
  return out;
}

double symmetry_check(const DensityMatrix& gm, int samples, unsigned seed) {
  const int d = gm.grid.d, n = gm.grid.n, k = gm.k;
  if (k < 2) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> node(0, n - 1);
  double worst = 0.0;
  std::vector<int> perm(k);
  for (int s = 0; s < samples; ++s) {
    for (int p = 0; p < k; ++p) perm[p] = p;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> idx(2 * k * d), pidx(2 * k * d);
    for (int a = 0; a < 2 * k * d; ++a) idx[a] = node(rng);
    for (int p = 0; p < k; ++p)
      for (int a = 0; a < d; ++a) {
        pidx[p * d + a] = idx[perm[p] * d + a];
        pidx[k * d + p * d + a] = idx[k * d + perm[p] * d + a];
      }
    worst = std::max(worst, std::abs(gm.data.at(idx) - gm.data.at(pidx)));
  }
  return worst;
}

DensityMatrix symmetrize(const DensityMatrix& gm) {
  const int d = gm.grid.d, n = gm.grid.n, k = gm.k;
  std::vector<int> perm(k);
  for (int p = 0; p < k; ++p) perm[p] = p;
  DensityMatrix out(gm.grid, k);
  int count = 0;
  do {
    std::vector<int> idx(2 * k * d), pidx(2 * k * d);
    for (std::size_t flat = 0; flat < out.data.size(); ++flat) {
      std::size_t rest = flat;
      for (int a = 2 * k * d - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(rest % n);
        rest /= n;
      }
      for (int p = 0; p < k; ++p)
        for (int a = 0; a < d; ++a) {
          pidx[p * d + a] = idx[perm[p] * d + a];
          pidx[k * d + p * d + a] = idx[k * d + perm[p] * d + a];
        }
      out.data[flat] += gm.data.at(pidx);
    }
    ++count;
  } while (std::next_permutation(perm.begin(), perm.end()));
  out.data *= cplx{1.0 / count, 0.0};
  out.symmetric_flag = true;
  return out;
}

}  // namespace wk
