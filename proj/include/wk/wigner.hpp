#pragma once

#include "wk/grid.hpp"

namespace wk {

// Midpoint fold of an (a,b) index pair on one periodic axis. The midpoint
// (x_a+x_b)/2 lives on the half-step lattice (index s, 2n values); the
// relative index is wrapped to [-n/2, n/2) and stored as an FFT bin r; the
// wrap adds half a period to the midpoint. Every (a,b) maps to exactly one
// (s,r) node with s == r (mod 2), and the map is a bijection onto that set.
struct FoldIdx {
  int s;  // mid index on the doubled lattice, 0..2n-1
  int r;  // rel FFT bin, 0..n-1 (signed value freq_of_bin(r,n))
};
FoldIdx fold_axis(int a, int b, int n);
void unfold_axis(int s, int r, int n, int& a, int& b);

// gamma(x,x') = dv^d sum_v f((x+x')/2, v) e^{i v.(x-x')}, with half-lattice
// midpoints supplied by the band-limited half-step shift of f. Exactly
// invertible; output Hermitian-flagged iff f is real-flagged.
DensityMatrix inverse_wigner(const PhaseField& f);

// Exact inverse of inverse_wigner (sector solve per axis pair).
PhaseField wigner(const DensityMatrix& g);

// max over node pairs of |gamma(X,X') - conj(gamma(X',X))|
double hermitian_check(const DensityMatrix& g);

// Mid-state representation used by the collision operators: phi(s, v) with
// mid on the doubled lattice (2n per axis) and v on the velocity lattice.
// For k=1 only. phi(2j, v) equals f(x_j, v) when gamma = inverse_wigner(f).
NdArray mid_state(const DensityMatrix& g);
// Assemble a k=1 DensityMatrix from per-mid rel rows: row(s, r) holds
// gammatilde(s, r) values; picks the parity-valid nodes.
DensityMatrix unfold_rows(const GridSpec& grid, const NdArray& rows);

// Upsample factor 2 along one axis assuming samples sit at the eps offset
// of the doubled lattice (band-limited, one-sided Nyquist convention).
NdArray upsample_x2_axis(const NdArray& a, int axis, int eps);

DensityMatrix tensor_product(const DensityMatrix& a, const DensityMatrix& b);

// max asymmetry under simultaneous particle permutations (sampled).
double symmetry_check(const DensityMatrix& g, int samples, unsigned seed);
DensityMatrix symmetrize(const DensityMatrix& g);

}  // namespace wk
