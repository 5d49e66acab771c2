#pragma once

#include <utility>
#include <vector>

#include "qphase/types.hpp"

namespace qphase {

struct Transmission {
  double t1 = 1.0;
  double t2 = 1.0;

  Transmission(double a, double b) : t1(a), t2(b) {
    if (t1 < 0.0 || t1 > 1.0 || t2 < 0.0 || t2 > 1.0)
      throw std::invalid_argument("Transmission: coefficients must lie in [0,1]");
  }
};

struct DensityMatrix {
  FockCutoff cutoff;
  Mat matrix;

  DensityMatrix(FockCutoff c, Mat m) : cutoff(c), matrix(std::move(m)) {
    if (matrix.rows() != cutoff.dim2() || matrix.cols() != cutoff.dim2())
      throw std::invalid_argument("DensityMatrix: size mismatch");
  }
};

// Single-mode photon-loss Kraus operators, <n-l|K_l|n> = sqrt(C(n,l) T^(n-l) (1-T)^l).
std::vector<Mat> loss_kraus_set(FockCutoff cutoff, double transmission);

// Production loss channel: K_l (x) K_m with T1 on mode a and T2 on mode b.
DensityMatrix apply_loss(const TwoModePureState& state, const Transmission& trans);
DensityMatrix apply_loss(const DensityMatrix& rho, const Transmission& trans);

// Slow reference oracle: fictitious beam splitters on a four-mode space,
// then a partial trace over the loss modes. Refuses N > 8 unless allow_large.
DensityMatrix loss_via_trace_out(const TwoModePureState& state, const Transmission& trans,
                                 bool allow_large = false);

// QFI with loss applied before vs. after the phase unitary; the two must agree.
std::pair<double, double> loss_phase_commutation_check(const TwoModePureState& state,
                                                       const Transmission& trans,
                                                       const Operator& generator, double phi);

}  // namespace qphase
