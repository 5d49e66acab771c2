#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qphase/channels.hpp"
#include "qphase/cobyla.hpp"
#include "qphase/types.hpp"

namespace qphase {

struct ProbeSearchProblem {
  FockCutoff cutoff;
  double nbar;
  Transmission trans;
  PhaseKind phase_kind = PhaseKind::linear;
  bool coefficients_real = true;

  ProbeSearchProblem(FockCutoff c, double n, Transmission t,
                     PhaseKind k = PhaseKind::linear, bool real_coeffs = true)
      : cutoff(c), nbar(n), trans(t), phase_kind(k), coefficients_real(real_coeffs) {
    if (nbar <= 0.0 || nbar >= 2.0 * cutoff.n_max)
      throw std::invalid_argument("ProbeSearchProblem: nbar must lie in (0, 2N)");
  }
};

struct CobylaConfig {
  double rho_begin = 0.5;
  double rho_end = 1e-7;
  int max_evals = 20000;
  double constraint_tolerance = 1e-8;
  int restarts = 16;
  uint64_t seed = 0;
};

struct ProbeSearchResult {
  TwoModePureState state;
  double qfi = 0.0;
  int evals_used = 0;
  int restart_index = -1;
  bool converged = false;
  uint64_t seed = 0;
  double correction_size = 0.0;  // post-run constraint projection magnitude
};

// Constrained QFI maximization over probe amplitudes: real coefficients by
// default, one warm start at the noiseless catalog state plus seeded random
// starts on the constraint manifold. extra_starts allows additional warm
// starts (e.g. an optimum from a smaller Fock dimension, zero padded).
ProbeSearchResult optimize_probe(const ProbeSearchProblem& problem, const CobylaConfig& config,
                                 const std::vector<Vec>& extra_starts = {});

struct PhaseValidation {
  double max_random_qfi = 0.0;
  bool pass = true;
};

// Optimality spot check: random phases on the optimized real coefficients
// must not raise the lossy QFI.
PhaseValidation random_phase_validation(const ProbeSearchResult& result,
                                        const ProbeSearchProblem& problem, int trials,
                                        uint64_t seed = 12345);

struct SweepRow {
  double t1, t2;
  double qfi = 0.0;
  bool converged = false;
  bool ok = false;
  uint64_t seed = 0;
  int evals = 0;
  Vec amplitudes;
};

std::vector<SweepRow> transmission_sweep(const ProbeSearchProblem& base,
                                         const std::vector<std::pair<double, double>>& grid,
                                         const CobylaConfig& config, int threads = 0);

// Projects amplitudes exactly onto the unit-norm and mean-particle-number
// constraints (exponential tilt in the photon-number weights). Returns the
// correction distance. Throws when nbar is unreachable from the support.
double project_to_constraints(Vec& amplitudes, FockCutoff cutoff, double nbar);

}  // namespace qphase
