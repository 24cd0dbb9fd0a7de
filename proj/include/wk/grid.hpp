#pragma once

#include <optional>
#include <string>

#include "wk/fft.hpp"
#include "wk/util.hpp"

namespace wk {

// Periodic truncation of R^d: positions in [-L_x, L_x)^d with n nodes per
// axis, velocities on the dual lattice of the relative coordinate, step
// pi/L_x, so the Wigner pair is exactly invertible on the grid.
struct GridSpec {
  int d = 1;
  int n = 4;
  double L_x = kPi;
  double L_v = 2.0;

  double dx() const { return 2.0 * L_x / n; }
  double dv() const { return kPi / L_x; }
  double dxi() const { return kPi / L_x; }  // dual lattice step of a position axis
  double x(int j) const { return -L_x + j * dx(); }
  double v(int k) const { return (k - n / 2) * dv(); }
  // signed frequency value of FFT bin k on a position axis
  double xi(int k) const { return freq_of_bin(k, n) * dxi(); }
  bool operator==(const GridSpec& o) const {
    return d == o.d && n == o.n && L_x == o.L_x && L_v == o.L_v;
  }
};

GridSpec make_grid(int d, int n, double L_x);
// Validates that L_v matches the dual lattice within 1e-12 relative.
GridSpec make_grid(int d, int n, double L_x, double L_v);
// Balanced box L_x = L_v = sqrt(n*pi/2), used throughout the tests.
GridSpec make_grid_balanced(int d, int n);

// f(x,v) on the 2d-axis lattice, axes ordered (x_1..x_d, v_1..v_d).
struct PhaseField {
  GridSpec grid;
  NdArray data;
  bool real_flag = false;

  PhaseField() = default;
  explicit PhaseField(const GridSpec& g) : grid(g) {
    std::vector<int> shape(2 * g.d, g.n);
    data = NdArray(shape);
  }
  double imag_residual() const;  // max |Im| over nodes
  void set_real_flag(double tol = 1e-12);
};

// gamma(X_k, X_k') with 2*k*d axes ordered (x_1..x_k axes, then primes).
struct DensityMatrix {
  GridSpec grid;
  int k = 1;
  NdArray data;
  bool hermitian_flag = false;
  bool symmetric_flag = false;

  DensityMatrix() = default;
  DensityMatrix(const GridSpec& g, int k_) : grid(g), k(k_) {
    std::vector<int> shape(2 * k_ * g.d, g.n);
    data = NdArray(shape);
  }
};

// Fourier coefficients over the dual lattice, same axis layout as the
// spatial field it came from.
struct SpectralField {
  GridSpec grid;
  int k = 1;
  NdArray data;
};

enum class FftDir { Forward, Backward };

// Unitary DFT along the chosen axes; forward then backward is the identity.
NdArray dft(const NdArray& a, const std::vector<int>& axes, FftDir dir);
SpectralField to_spectral(const DensityMatrix& g);
DensityMatrix from_spectral(const SpectralField& s);

struct Moments {
  double mass = 0.0;
  std::vector<double> momentum;
  double energy = 0.0;
  double complex_residual = 0.0;
};

// Lattice (periodic trapezoidal) quadrature of f, v f, |v|^2 f.
Moments moments(const PhaseField& f);

// k factorized single-particle kernels, or an arbitrary kernel callable on
// node coordinates. Pointwise evaluation of a factorized state is the exact
// product of factor values.
struct LazyTensorState {
  int k = 1;
  std::vector<DensityMatrix> factors;  // size k when factorized
  using Kernel = std::function<cplx(const std::vector<double>& X, const std::vector<double>& Xp)>;
  Kernel kernel;  // used when factors is empty

  cplx eval(const std::vector<int>& X_idx, const std::vector<int>& Xp_idx) const;
};

// Raw little-endian float64 (re,im) interleaved, row-major, with a text
// key=value sidecar (<path>.meta).
void save_phase_field(const PhaseField& f, const std::string& path);
PhaseField load_phase_field(const std::string& path);
void save_density_matrix(const DensityMatrix& g, const std::string& path);
DensityMatrix load_density_matrix(const std::string& path);

}  // namespace wk
