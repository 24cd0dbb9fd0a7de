#pragma once

#include "wk/grid.hpp"

namespace wk {

enum class KernelKind { Maxwell, VariableHardSphere, HardSphere };

// Collision kernel b(|u|, omega.u/|u|) with cutoff index A in [0,1]:
// Maxwell b == 1 (A=0), hard spheres b = [omega.u]_+ (A=1), variable hard
// sphere b = |u|^A (0<A<1). u_max truncates the Fourier tabulation.
struct KernelModel {
  KernelKind kind = KernelKind::Maxwell;
  double A = 0.0;
  double u_max = 0.0;  // 0 means untruncated (Maxwell) or set from grid

  static KernelModel maxwell();
  static KernelModel hard_sphere(double u_max);
  static KernelModel vhs(double A, double u_max);
  bool truncated() const { return u_max > 0.0; }
};

struct CollisionGeometry {
  std::vector<double> omega;  // unit vector on S^{d-1}
  explicit CollisionGeometry(std::vector<double> w);
};

// Quadrature rule on S^{d-1}: d=1 uses {-1,+1}; d=2 equispaced angles;
// d=3 Gauss-Legendre in cos(theta) x uniform in phi.
struct SphereRule {
  std::vector<std::vector<double>> nodes;
  std::vector<double> weights;
  double total_weight() const;
};
SphereRule sphere_rule(int d, int n_omega);

double b_eval(const KernelModel& m, const std::vector<double>& u, const std::vector<double>& omega);

// Brute-force sup of b/(1+|u|^A) over |u| <= u_max and omega, by sampling.
double linf_A_norm(const KernelModel& m, int d, double u_max, int sample_count, unsigned seed = 7);

// Tabulated directional Fourier transform of the truncated kernel on the
// dual (z) lattice. For Maxwell the transform collapses to a lattice delta;
// `delta` is set and `delta_weight` carries (2 L_v)^d.
struct BhatTable {
  bool delta = false;
  double delta_weight = 0.0;
  NdArray table;  // over the z lattice (FFT bin order), d axes
};
BhatTable b_hat_omega(const KernelModel& m, const std::vector<double>& omega, const GridSpec& g);

std::vector<double> p_omega(const std::vector<double>& omega, const std::vector<double>& x);
std::vector<double> r_omega(const std::vector<double>& omega, const std::vector<double>& x);
void collide(const std::vector<double>& v, const std::vector<double>& v2,
             const std::vector<double>& omega, std::vector<double>& v_out,
             std::vector<double>& v2_out);

}  // namespace wk
