#pragma once

#include "wk/kernel.hpp"
#include "wk/norms.hpp"
#include "wk/wigner.hpp"

namespace wk {

// Angular tables for the kernel-side collision operators, built once per
// (grid, model). The sphere quadrature used here is the operator's own
// converged internal rule; the velocity-space route q_classical uses the
// caller-supplied n_omega, which is what oracle comparisons refine.
struct CollisionTables {
  GridSpec grid;
  KernelModel model;
  int n_omega_internal = 0;
  std::vector<double> k_loss;  // per g bin: sum_w w b(|g|, w.ghat)
  NdArray k_gain;              // (g bin, rel bin): sum_w w b(|g|,-w.ghat) e^{-i (P_w g).y}
  std::vector<int> shift_map;  // flat (g,k) -> flat bin of (k - g) mod n per axis
};

const CollisionTables& collision_tables(const GridSpec& g, const KernelModel& m,
                                        int n_omega_internal = 0);

// Classical velocity-space collision operator (ground-truth route):
// Q(f,f)(x,v) = sum_{v2,w} b (f(x,v*)f(x,v2*) - f(x,v)f(x,v2)) dv^d dw with
// off-lattice arguments evaluated by exact trigonometric interpolation.
PhaseField q_classical(const PhaseField& f, const KernelModel& m, int n_omega);
// Gain and loss parts separately.
PhaseField q_classical_part(const PhaseField& f, const KernelModel& m, int n_omega, bool gain);

// Bilinear velocity-profile form: Q_v(g,h)(v) over one spatial point.
std::vector<cplx> q_profile(const std::vector<cplx>& gprof, const std::vector<cplx>& hprof,
                            const GridSpec& g, const KernelModel& m, int n_omega, bool gain,
                            bool loss);

// Kernel-side operators on density matrices (k = 1).
DensityMatrix b_loss(const DensityMatrix& g1, const DensityMatrix& g2, const KernelModel& m);
DensityMatrix b_gain(const DensityMatrix& g1, const DensityMatrix& g2, const KernelModel& m);
DensityMatrix b_full(const DensityMatrix& g1, const DensityMatrix& g2, const KernelModel& m);

// Hierarchy operator B_{i,k+1} = B+_{i,k+1} - B-_{i,k+1} contracting particle
// k+1 against particle i (1-based i <= k). state has k+1 particles.
DensityMatrix b_hierarchy(int i, int k, const DensityMatrix& state, const KernelModel& m);
// Factorized lazy route: spectator product times the pair contraction.
DensityMatrix b_hierarchy(int i, int k, const LazyTensorState& state, const KernelModel& m);

// sum_x gamma(x,x) dx^d (mass balance of the operator output)
cplx diag_sum(const DensityMatrix& g);

}  // namespace wk
