#pragma once

#include "qphase/channels.hpp"
#include "qphase/metrology.hpp"
#include "qphase/rng.hpp"
#include "qphase/types.hpp"

#include <unsupported/Eigen/MatrixFunctions>

namespace qphase::testing {

inline TwoModePureState random_state(FockCutoff cutoff, Rng& rng) {
  Vec c(cutoff.dim2());
  for (int k = 0; k < c.size(); ++k) c(k) = Complex(rng.normal(), rng.normal());
  c /= c.norm();
  return {cutoff, std::move(c)};
}

// Uhlmann fidelity, used as an independent QFI cross-check oracle:
// F_qfi ~= 8 (1 - sqrt(Fid(rho_phi, rho_{phi+dphi}))) / dphi^2.
inline double fidelity(const Mat& rho, const Mat& sigma) {
  Eigen::SelfAdjointEigenSolver<Mat> es(rho);
  Vec sq = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().cast<Complex>();
  Mat sqrt_rho = es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().adjoint();
  Mat inner = sqrt_rho * sigma * sqrt_rho;
  Eigen::SelfAdjointEigenSolver<Mat> es2(inner);
  double tr = 0.0;
  for (int i = 0; i < es2.eigenvalues().size(); ++i)
    tr += std::sqrt(std::max(0.0, es2.eigenvalues()(i)));
  return tr * tr;
}

inline double qfi_fidelity_oracle(const DensityMatrix& rho, const Operator& generator,
                                  double dphi = 1e-4) {
  const Mat u = ((Complex(0.0, dphi) * generator.matrix).exp());
  const Mat shifted = u * rho.matrix * u.adjoint();
  const double fid = fidelity(rho.matrix, shifted);
  return 8.0 * (1.0 - std::sqrt(std::min(1.0, fid))) / (dphi * dphi);
}

inline DensityMatrix pure_density(const TwoModePureState& psi) {
  return {psi.cutoff, psi.amplitudes * psi.amplitudes.adjoint()};
}

}  // namespace qphase::testing
