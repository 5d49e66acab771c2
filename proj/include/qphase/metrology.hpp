#pragma once

#include <string>
#include <vector>

#include "qphase/channels.hpp"
#include "qphase/types.hpp"

namespace qphase {

struct SpectralDecomposition {
  RVec eigenvalues;  // ascending
  Mat eigenvectors;  // columns match eigenvalues
  double support_threshold = 1e-12;

  // Indices of eigenvalues above the support threshold (the set S).
  std::vector<int> support() const;
};

SpectralDecomposition decompose(const DensityMatrix& rho, double support_threshold = 1e-12);

struct Povm {
  std::vector<Mat> elements;
  std::vector<std::string> labels;

  int size() const { return static_cast<int>(elements.size()); }
};

struct SldOperator {
  Mat matrix;
  double eval_phase = 0.0;
};

// QFI of the unitary family exp(i phi G) rho exp(-i phi G), via the spectral
// formula restricted to the support of rho.
double qfi(const DensityMatrix& rho, const Operator& generator,
           double support_threshold = 1e-12);

// SLD of rho_phi = U rho U^dag at the given phase; d_phi rho = i[G, rho_phi].
SldOperator sld(const DensityMatrix& rho, const Operator& generator, double phi,
                double support_threshold = 1e-12);

// Projective measurement from the SLD eigenbasis, conjugated by the second
// beam splitter so that the measurement pipeline cancels it.
Povm sldm_povm(const DensityMatrix& rho, const Operator& generator, double phi_hat,
               double support_threshold = 1e-12);

// Photon-number parity on output mode a (after the second beam splitter).
Povm parity_povm(FockCutoff cutoff);

// Joint particle counting on both output modes.
Povm pc_povm(FockCutoff cutoff);

// Born-rule probabilities p_k = Tr(V U rho U^dag V^dag E_k) with V the second
// beam splitter; negative round-off clipped and renormalized.
RVec outcome_probabilities(const DensityMatrix& rho, const Operator& generator, double phi,
                           const Povm& povm);

// Classical Fisher information via central finite differences of the outcome
// probabilities (step h).
double cfi(const DensityMatrix& rho, const Operator& generator, double phi, const Povm& povm,
           double h = 1e-5);

}  // namespace qphase
