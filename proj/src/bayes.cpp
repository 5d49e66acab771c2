#include "qphase/bayes.hpp"

#include <cmath>
#include <future>
#include <map>
#include <thread>

#include "qphase/fock.hpp"

namespace qphase {

namespace {

// Frequency-domain outcome probabilities for a diagonal generator:
// p_k(phi) = Re sum_w c_k(w) e^{i phi w}, with w running over eigenvalue
// differences of the generator. Makes dense phi tables cheap.
class LikelihoodModel {
 public:
  LikelihoodModel(const EstimationInstance& inst, const Povm& povm) {
    const Mat& v = cached_beam_splitter(inst.rho.cutoff);
    const int dim = static_cast<int>(inst.rho.matrix.rows());
    RVec g(dim);
    for (int i = 0; i < dim; ++i) g(i) = inst.generator.matrix(i, i).real();

    std::map<long, int> freq_index;
    auto freq_of = [&](double w) {
      const long key = std::lround(w * 1e6);
      auto it = freq_index.find(key);
      if (it == freq_index.end()) {
        it = freq_index.emplace(key, static_cast<int>(freqs_.size())).first;
        freqs_.push_back(w);
      }
      return it->second;
    };

    const int nout = povm.size();
    std::vector<std::vector<Complex>> coef(nout);
    for (int k = 0; k < nout; ++k) {
      const Mat m = v.adjoint() * povm.elements[k] * v;
      std::vector<Complex> ck;
      for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) {
          const Complex wij = inst.rho.matrix(i, j) * m(j, i);
          if (std::abs(wij) < 1e-18) continue;
          const int fi = freq_of(g(i) - g(j));
          if (fi >= static_cast<int>(ck.size())) ck.resize(freqs_.size(), Complex(0.0));
          ck[fi] += wij;
        }
      ck.resize(freqs_.size(), Complex(0.0));
      coef[k] = std::move(ck);
    }
    // Pad to a rectangular matrix (outcomes x freqs).
    coefs_ = Mat::Zero(nout, static_cast<int>(freqs_.size()));
    for (int k = 0; k < nout; ++k)
      for (size_t f = 0; f < coef[k].size(); ++f) coefs_(k, static_cast<int>(f)) = coef[k][f];
  }

  RVec probs(double theta) const {
    const int nf = static_cast<int>(freqs_.size());
    Vec ph(nf);
    for (int f = 0; f < nf; ++f) ph(f) = std::exp(Complex(0.0, theta * freqs_[f]));
    RVec p = (coefs_ * ph).real().cwiseMax(0.0);
    const double total = p.sum();
    if (total > 0.0) p /= total;
    return p;
  }

  RMat table(const RVec& thetas) const {
    RMat t(coefs_.rows(), thetas.size());
    for (int j = 0; j < thetas.size(); ++j) t.col(j) = probs(thetas(j));
    return t;
  }

 private:
  std::vector<double> freqs_;
  Mat coefs_;
};

bool generator_is_diagonal(const Operator& g) { return is_diagonal(g.matrix, 1e-13); }

void record(Trajectory& traj, const BayesState& state, int stage, double phi_true) {
  const double est = state.estimate();
  traj.push_back({state.iteration, stage, est, state.variance(),
                  (est - phi_true) * (est - phi_true)});
}

// Refines the grid x4 around the posterior mass when it has collapsed onto
// fewer than 3 points.
void maybe_refine(BayesState& state) {
  int massed = 0;
  for (int j = 0; j < state.posterior.size(); ++j)
    if (state.posterior(j) > 1e-9) ++massed;
  if (massed >= 3) return;

  const double est = state.estimate();
  const double sigma = std::sqrt(std::max(state.variance(), 0.0));
  const double half = std::max(10.0 * sigma, 10.0 * state.grid.step());
  const double lo = std::max(state.grid.lower, est - half);
  const double hi = std::min(state.grid.upper, est + half);
  PhaseGrid fine = PhaseGrid::make(lo, hi, state.grid.points * 4);

  RVec post(fine.points);
  for (int j = 0; j < fine.points; ++j) {
    const double x = fine.values(j);
    const double u = (x - state.grid.lower) / state.grid.step();
    const int i0 = std::min(static_cast<int>(u), state.grid.points - 2);
    const double frac = u - i0;
    post(j) = (1.0 - frac) * state.posterior(i0) + frac * state.posterior(i0 + 1);
  }
  const double total = post.sum();
  if (total <= 0.0) return;
  state.grid = fine;
  state.posterior = post / total;
}

}  // namespace

PhaseGrid PhaseGrid::make(double lo, double hi, int pts) {
  if (!(lo < hi) || pts < 2) throw std::invalid_argument("PhaseGrid: need lower < upper, points >= 2");
  PhaseGrid g;
  g.lower = lo;
  g.upper = hi;
  g.points = pts;
  g.values = RVec::LinSpaced(pts, lo, hi);
  return g;
}

BayesState BayesState::uniform_prior(const PhaseGrid& grid) {
  BayesState s;
  s.grid = grid;
  s.posterior = RVec::Constant(grid.points, 1.0 / grid.points);
  return s;
}

double BayesState::estimate() const { return posterior.dot(grid.values); }

double BayesState::variance() const {
  const double m = estimate();
  double v = 0.0;
  for (int j = 0; j < posterior.size(); ++j) {
    const double d = grid.values(j) - m;
    v += posterior(j) * d * d;
  }
  return v;
}

int TwoStepSchedule::total_iterations() const {
  int t = pre_iterations;
  for (int s : sldm_stage_iterations) t += s;
  return t;
}

RMat likelihood_over_grid(const EstimationInstance& inst, const Povm& povm,
                          const PhaseGrid& grid, double shift) {
  if (generator_is_diagonal(inst.generator)) {
    LikelihoodModel model(inst, povm);
    RVec thetas = grid.values.array() + shift;
    return model.table(thetas);
  }
  RMat t(povm.size(), grid.points);
  for (int j = 0; j < grid.points; ++j)
    t.col(j) = outcome_probabilities(inst.rho, inst.generator, grid.values(j) + shift, povm);
  return t;
}

int sample_outcome(const RVec& probabilities, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (int k = 0; k < probabilities.size(); ++k) {
    acc += probabilities(k);
    if (u < acc) return k;
  }
  return static_cast<int>(probabilities.size()) - 1;
}

int sample_outcome(const DensityMatrix& rho, const Operator& generator, double phi_true,
                   const Povm& povm, Rng& rng) {
  return sample_outcome(outcome_probabilities(rho, generator, phi_true, povm), rng);
}

void bayes_update(BayesState& state, const RVec& likelihood_row) {
  RVec post = state.posterior.cwiseProduct(likelihood_row);
  const double total = post.sum();
  if (total <= 0.0)
    throw std::runtime_error(
        "bayes_update: likelihood vanished on the entire grid (" +
        std::to_string(state.grid.points) + " points in [" + std::to_string(state.grid.lower) +
        ", " + std::to_string(state.grid.upper) + "])");
  state.posterior = post / total;
  ++state.iteration;
  state.history.push_back({state.iteration, state.estimate(), state.variance()});
}

Trajectory run_two_step(const EstimationInstance& inst, double phi_true,
                        const TwoStepSchedule& schedule, const PhaseGrid& grid, Rng& rng) {
  if (phi_true < grid.lower || phi_true > grid.upper)
    throw std::invalid_argument("run_two_step: phi_true outside the grid range");

  BayesState state = BayesState::uniform_prior(grid);
  Trajectory traj;

  auto run_stage = [&](const Povm& povm, int iterations, int stage_id) {
    const RMat lh = likelihood_over_grid(inst, povm, state.grid);
    const RVec ptrue = outcome_probabilities(inst.rho, inst.generator, phi_true, povm);
    for (int it = 0; it < iterations; ++it) {
      const int outcome = sample_outcome(ptrue, rng);
      bayes_update(state, lh.row(outcome));
      record(traj, state, stage_id, phi_true);
    }
  };

  run_stage(pc_povm(inst.rho.cutoff), schedule.pre_iterations, 0);
  int stage_id = 1;
  for (int iters : schedule.sldm_stage_iterations) {
    maybe_refine(state);
    const double phi_hat = state.estimate();
    run_stage(sldm_povm(inst.rho, inst.generator, phi_hat), iters, stage_id);
    ++stage_id;
  }
  return traj;
}

double pc_max_cfi_phase(const EstimationInstance& inst, int scan_points) {
  const Povm povm = pc_povm(inst.rho.cutoff);
  double best_phi = 0.0, best_i = -1.0;
  for (int s = 0; s < scan_points; ++s) {
    const double phi = 2.0 * M_PI * s / scan_points;
    const double i = cfi(inst.rho, inst.generator, phi, povm);
    if (i > best_i) {
      best_i = i;
      best_phi = phi;
    }
  }
  return best_phi;
}

namespace {

// Shared per-instance state of the adaptive-PC baseline: the CFI-maximizing
// phase, the frequency-domain likelihood model and a master table over all
// reachable shifted phases. The control phase is snapped to the grid step so
// each likelihood row is a window into the master table.
struct AdaptivePcContext {
  double phi_star;
  LikelihoodModel model;
  double step;
  long s_min, s_max;
  RMat master;

  AdaptivePcContext(const EstimationInstance& inst, const PhaseGrid& grid)
      : phi_star(pc_max_cfi_phase(inst)),
        model(inst, pc_povm(inst.rho.cutoff)),
        step(grid.step()),
        s_min(std::lround(std::floor((phi_star - grid.upper) / step)) - 1),
        s_max(std::lround(std::ceil((phi_star - grid.lower) / step)) + 1) {
    const long ncols = (grid.points - 1) + (s_max - s_min) + 1;
    RVec thetas(ncols);
    for (long q = 0; q < ncols; ++q) thetas(q) = grid.lower + (s_min + q) * step;
    master = model.table(thetas);
  }
};

Trajectory run_adaptive_pc_core(const AdaptivePcContext& ctx, double phi_true, int iterations,
                                const PhaseGrid& grid, Rng& rng) {
  if (phi_true < grid.lower || phi_true > grid.upper)
    throw std::invalid_argument("run_adaptive_pc: phi_true outside the grid range");

  BayesState state = BayesState::uniform_prior(grid);
  Trajectory traj;
  for (int it = 0; it < iterations; ++it) {
    const long s = std::min(
        ctx.s_max, std::max(ctx.s_min, std::lround((ctx.phi_star - state.estimate()) / ctx.step)));
    const double phi_c = s * ctx.step;
    const RVec ptrue = ctx.model.probs(phi_true + phi_c);
    const int outcome = sample_outcome(ptrue, rng);
    const long off = s - ctx.s_min;
    bayes_update(state, ctx.master.row(outcome).segment(off, grid.points));
    record(traj, state, 0, phi_true);
  }
  return traj;
}

}  // namespace

Trajectory run_adaptive_pc(const EstimationInstance& inst, double phi_true, int iterations,
                           const PhaseGrid& grid, Rng& rng) {
  return run_adaptive_pc_core(AdaptivePcContext(inst, grid), phi_true, iterations, grid, rng);
}

RVec aggregate_mse(const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty()) return RVec();
  const size_t len = trajectories.front().size();
  RVec mse = RVec::Zero(len);
  for (const auto& t : trajectories)
    for (size_t i = 0; i < len; ++i) mse(i) += t[i].sq_error;
  return mse / static_cast<double>(trajectories.size());
}

RVec aggregate_mean_estimate(const std::vector<Trajectory>& trajectories) {
  if (trajectories.empty()) return RVec();
  const size_t len = trajectories.front().size();
  RVec m = RVec::Zero(len);
  for (const auto& t : trajectories)
    for (size_t i = 0; i < len; ++i) m(i) += t[i].estimate;
  return m / static_cast<double>(trajectories.size());
}

namespace {

template <typename Fn>
std::vector<Trajectory> run_parallel(int simulations, uint64_t master_seed, int threads, Fn&& fn) {
  std::vector<Trajectory> out(simulations);
  int nthreads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::max(1, std::min(nthreads, simulations));
  std::vector<std::future<void>> futs;
  for (int t = 0; t < nthreads; ++t)
    futs.push_back(std::async(std::launch::async, [&, t] {
      for (int i = t; i < simulations; i += nthreads) {
        Rng rng(Rng::derive(master_seed, i));
        out[i] = fn(rng);
      }
    }));
  for (auto& f : futs) f.get();
  return out;
}

}  // namespace

std::vector<Trajectory> simulate_two_step(const EstimationInstance& inst, double phi_true,
                                          const TwoStepSchedule& schedule, const PhaseGrid& grid,
                                          uint64_t master_seed, int threads) {
  return run_parallel(schedule.simulations, master_seed, threads,
                      [&](Rng& rng) { return run_two_step(inst, phi_true, schedule, grid, rng); });
}

std::vector<Trajectory> simulate_adaptive_pc(const EstimationInstance& inst, double phi_true,
                                             int iterations, int simulations,
                                             const PhaseGrid& grid, uint64_t master_seed,
                                             int threads) {
  const AdaptivePcContext ctx(inst, grid);  // shared across trajectories
  return run_parallel(simulations, master_seed, threads, [&](Rng& rng) {
    return run_adaptive_pc_core(ctx, phi_true, iterations, grid, rng);
  });
}

AverageCfiCurves average_cfi_of_estimated_sldm(const EstimationInstance& inst, double phi_true,
                                               const TwoStepSchedule& schedule, int simulations,
                                               const PhaseGrid& grid, const RVec& phi_eval,
                                               uint64_t master_seed) {
  AverageCfiCurves curves;
  curves.phi = phi_eval;
  curves.stage1 = RVec::Zero(phi_eval.size());
  curves.stage2 = RVec::Zero(phi_eval.size());
  curves.at_true = RVec::Zero(phi_eval.size());

  const Povm sldm_true = sldm_povm(inst.rho, inst.generator, phi_true);
  for (int j = 0; j < phi_eval.size(); ++j)
    curves.at_true(j) = cfi(inst.rho, inst.generator, phi_eval(j), sldm_true);

  const Povm pc = pc_povm(inst.rho.cutoff);
  const RMat lh_pc = likelihood_over_grid(inst, pc, grid);
  const RVec ptrue_pc = outcome_probabilities(inst.rho, inst.generator, phi_true, pc);

  for (int sim = 0; sim < simulations; ++sim) {
    Rng rng(Rng::derive(master_seed, sim));
    BayesState state = BayesState::uniform_prior(grid);
    for (int it = 0; it < schedule.pre_iterations; ++it)
      bayes_update(state, lh_pc.row(sample_outcome(ptrue_pc, rng)));
    const double phi1 = state.estimate();

    const Povm sldm1 = sldm_povm(inst.rho, inst.generator, phi1);
    const RMat lh1 = likelihood_over_grid(inst, sldm1, state.grid);
    const RVec ptrue1 = outcome_probabilities(inst.rho, inst.generator, phi_true, sldm1);
    const int stage1_iters =
        schedule.sldm_stage_iterations.empty() ? 0 : schedule.sldm_stage_iterations.front();
    for (int it = 0; it < stage1_iters; ++it)
      bayes_update(state, lh1.row(sample_outcome(ptrue1, rng)));
    const double phi2 = state.estimate();
    const Povm sldm2 = sldm_povm(inst.rho, inst.generator, phi2);

    for (int j = 0; j < phi_eval.size(); ++j) {
      curves.stage1(j) += cfi(inst.rho, inst.generator, phi_eval(j), sldm1);
      curves.stage2(j) += cfi(inst.rho, inst.generator, phi_eval(j), sldm2);
    }
  }
  if (simulations > 0) {
    curves.stage1 /= simulations;
    curves.stage2 /= simulations;
  }
  return curves;
}

}  // namespace qphase
