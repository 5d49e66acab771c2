#pragma once

#include <cstdint>
#include <vector>

#include "qphase/channels.hpp"
#include "qphase/metrology.hpp"
#include "qphase/rng.hpp"
#include "qphase/types.hpp"

namespace qphase {

struct PhaseGrid {
  double lower = 0.0;
  double upper = M_PI / 6.0;
  int points = 1000;
  RVec values;

  static PhaseGrid make(double lo, double hi, int pts);
  double step() const { return (upper - lower) / (points - 1); }
};

struct HistoryEntry {
  int iteration;
  double estimate;
  double variance;
};

struct BayesState {
  PhaseGrid grid;
  RVec posterior;  // nonnegative, unit sum
  int iteration = 0;
  std::vector<HistoryEntry> history;

  static BayesState uniform_prior(const PhaseGrid& grid);
  double estimate() const;
  double variance() const;
};

struct TwoStepSchedule {
  int pre_iterations = 50;
  std::vector<int> sldm_stage_iterations = {250, 200};
  int simulations = 2000;

  int total_iterations() const;
};

struct TrajectoryRecord {
  int iter;
  int stage;  // 0 = pre-estimation, 1.. = SLDM stages
  double estimate;
  double variance;
  double sq_error;
};

using Trajectory = std::vector<TrajectoryRecord>;

// The estimation problem instance: lossy probe state, generator and cutoff.
struct EstimationInstance {
  DensityMatrix rho;
  Operator generator;
};

// Likelihood of every outcome over the grid (rows = outcomes, cols = grid
// points), evaluated at phase values[j] + shift. Fast path for diagonal
// generators.
RMat likelihood_over_grid(const EstimationInstance& inst, const Povm& povm,
                          const PhaseGrid& grid, double shift = 0.0);

int sample_outcome(const RVec& probabilities, Rng& rng);
int sample_outcome(const DensityMatrix& rho, const Operator& generator, double phi_true,
                   const Povm& povm, Rng& rng);

// posterior <- posterior * likelihood(outcome | grid), renormalized.
void bayes_update(BayesState& state, const RVec& likelihood_row);

Trajectory run_two_step(const EstimationInstance& inst, double phi_true,
                        const TwoStepSchedule& schedule, const PhaseGrid& grid, Rng& rng);

// Adaptive particle-counting baseline: a control phase recenters the current
// estimate onto the CFI-maximizing point of the PC measurement.
Trajectory run_adaptive_pc(const EstimationInstance& inst, double phi_true, int iterations,
                           const PhaseGrid& grid, Rng& rng);

// Pointwise mean squared error across trajectories at each iteration.
RVec aggregate_mse(const std::vector<Trajectory>& trajectories);
RVec aggregate_mean_estimate(const std::vector<Trajectory>& trajectories);

std::vector<Trajectory> simulate_two_step(const EstimationInstance& inst, double phi_true,
                                          const TwoStepSchedule& schedule, const PhaseGrid& grid,
                                          uint64_t master_seed, int threads = 0);
std::vector<Trajectory> simulate_adaptive_pc(const EstimationInstance& inst, double phi_true,
                                             int iterations, int simulations,
                                             const PhaseGrid& grid, uint64_t master_seed,
                                             int threads = 0);

struct AverageCfiCurves {
  RVec phi;          // evaluation grid
  RVec stage1;       // average CFI of the SLDM built at phi_hat_1
  RVec stage2;       // average CFI of the SLDM built at phi_hat_2
  RVec at_true;      // CFI of the SLDM built exactly at phi_true
};

AverageCfiCurves average_cfi_of_estimated_sldm(const EstimationInstance& inst, double phi_true,
                                               const TwoStepSchedule& schedule, int simulations,
                                               const PhaseGrid& grid, const RVec& phi_eval,
                                               uint64_t master_seed);

// Phase maximizing the CFI of the PC measurement, dense scan over [0, 2pi).
double pc_max_cfi_phase(const EstimationInstance& inst, int scan_points = 1257);

}  // namespace qphase
