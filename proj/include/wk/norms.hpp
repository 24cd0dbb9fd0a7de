#pragma once

#include "wk/grid.hpp"

namespace wk {

// Weight tuple for the spectral norms: polynomial weights in xi +- xi' with
// an exponential velocity weight e^{kappa <xi-xi'>^{1/sigma}}; lambda is the
// time-decay rate of kappa, xi_w the hierarchy geometric weight.
struct NormParams {
  double alpha = 0.0;
  double beta = 0.0;
  double sigma = 1.0;
  double kappa = 0.0;
  double lambda = 0.0;
  double xi_w = 1.0;

  NormParams with_kappa(double k) const {
    NormParams p = *this;
    p.kappa = k;
    return p;
  }
  // admissibility of the local well-posedness regime (flagged, not enforced)
  bool regime_ok(int d, double A) const;
};

inline double jbracket(double r2) { return std::sqrt(1.0 + r2); }  // <x> = sqrt(1+|x|^2)

// || <xi+xi'>^a <xi-xi'>^b e^{kappa<xi-xi'>^{1/sigma}} gamma_hat ||_{l2},
// per-particle product weights for k > 1. Throws ScaleError if the
// exponential weight overflows on a populated node.
double h_norm(const DensityMatrix& g, const NormParams& p);

// || <2v>^b e^{kappa<2v>^{1/sigma}} (1-Lap_x)^{a/2} f ||_{l2}
double classical_norm(const PhaseField& f, const NormParams& p);

// sum_k xi_w^k h_norm(gamma^(k)); Gamma indexed k = 1..K
double hierarchy_norm(const std::vector<DensityMatrix>& Gamma, const NormParams& p);

struct TimeWeightedNorms {
  double sup_norm = 0.0;  // sup_t h_norm(gamma(t); kappa - lambda t)
  double l1_norm = 0.0;   // trapezoidal int_0^T h_norm(zeta(t); kappa - lambda t) dt
};
TimeWeightedNorms time_weighted_norms(const std::vector<double>& times,
                                      const std::vector<DensityMatrix>& gamma,
                                      const std::vector<DensityMatrix>& zeta,
                                      const NormParams& p);

}  // namespace wk
