#pragma once

#include <vector>

#include "qphase/types.hpp"

namespace qphase {

// Catalog parameters for the analytical noiseless optimal probe states.
// relative_phases supplies theta / theta_1..theta_3 as the regime requires;
// missing entries default to 0.
struct OfpsSpec {
  FockCutoff cutoff;
  double nbar;
  PhaseKind phase_kind = PhaseKind::linear;
  std::vector<double> relative_phases;

  OfpsSpec(FockCutoff c, double n, PhaseKind k = PhaseKind::linear,
           std::vector<double> phases = {})
      : cutoff(c), nbar(n), phase_kind(k), relative_phases(std::move(phases)) {
    if (nbar <= 0.0 || nbar >= 2.0 * cutoff.n_max)
      throw std::invalid_argument("OfpsSpec: nbar must lie in (0, 2N)");
  }
  double phase(size_t idx) const {
    return idx < relative_phases.size() ? relative_phases[idx] : 0.0;
  }
};

TwoModePureState noiseless_ofps(const OfpsSpec& spec);

// Closed form nbar*N / N*(2N-nbar) in the linear regimes; numerical QFI of
// the catalog state otherwise.
double noiseless_ofps_qfi(const OfpsSpec& spec);

// First-order small-loss approximation of the QFI: dominant eigenbranch of
// the exact channel at (1-delta1, 1-delta2), then 4*lambda0*var(G).
// Errors out when the dominant eigenvalue is not separated by 10x from the
// next one (expansion out of range).
double taylor_qfi_first_order(const OfpsSpec& spec, double delta1, double delta2);

}  // namespace qphase
