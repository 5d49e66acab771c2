#include "qphase/optimize.hpp"

#include <cmath>
#include <future>
#include <thread>

#include "qphase/fock.hpp"
#include "qphase/metrology.hpp"
#include "qphase/probes.hpp"
#include "qphase/rng.hpp"

namespace qphase {

namespace {

// Photon-number weight (i+j) per flat index.
RVec number_weights(FockCutoff cutoff) {
  RVec w(cutoff.dim2());
  for (int i = 0; i < cutoff.dim(); ++i)
    for (int j = 0; j < cutoff.dim(); ++j) w(cutoff.flat(i, j)) = i + j;
  return w;
}

Vec amplitudes_from_x(const RVec& x, int dim2, bool real_coeffs) {
  Vec c(dim2);
  if (real_coeffs) {
    for (int k = 0; k < dim2; ++k) c(k) = x(k);
  } else {
    for (int k = 0; k < dim2; ++k) c(k) = Complex(x(k), x(dim2 + k));
  }
  return c;
}

}  // namespace

double project_to_constraints(Vec& amplitudes, FockCutoff cutoff, double nbar) {
  const RVec w = number_weights(cutoff);
  const Vec before = amplitudes;
  const double nrm = amplitudes.norm();
  if (nrm < 1e-12) throw std::domain_error("project_to_constraints: zero amplitude vector");
  amplitudes /= nrm;

  auto mean_at = [&](double t) {
    double num = 0.0, den = 0.0;
    for (int k = 0; k < w.size(); ++k) {
      const double p = std::norm(amplitudes(k)) * std::exp(t * w(k));
      num += p * w(k);
      den += p;
    }
    return num / den;
  };

  double lo = -60.0, hi = 60.0;
  if (mean_at(lo) > nbar || mean_at(hi) < nbar)
    throw std::domain_error("project_to_constraints: nbar unreachable from amplitude support");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_at(mid) < nbar ? lo : hi) = mid;
  }
  const double t = 0.5 * (lo + hi);
  for (int k = 0; k < w.size(); ++k) amplitudes(k) *= std::exp(0.5 * t * w(k));
  amplitudes /= amplitudes.norm();
  return (amplitudes - before).norm();
}

ProbeSearchResult optimize_probe(const ProbeSearchProblem& problem, const CobylaConfig& config,
                                 const std::vector<Vec>& extra_starts) {
  const int dim2 = problem.cutoff.dim2();
  const int nvar = problem.coefficients_real ? dim2 : 2 * dim2;
  const RVec w = number_weights(problem.cutoff);
  const Operator gen = phase_generator(problem.cutoff, problem.phase_kind);
  const double eps = config.constraint_tolerance;

  auto objective = [&](const RVec& x) -> double {
    Vec c = amplitudes_from_x(x, dim2, problem.coefficients_real);
    const double nrm = c.norm();
    if (nrm < 1e-8) return 0.0;  // degenerate vertex, zero information
    c /= nrm;
    const DensityMatrix rho = apply_loss(TwoModePureState{problem.cutoff, std::move(c)},
                                         problem.trans);
    return -qfi(rho, gen);
  };

  std::vector<ScalarFn> constraints;
  for (int k = 0; k < nvar; ++k) {
    constraints.push_back([k](const RVec& x) { return 1.0 - x(k); });
    constraints.push_back([k](const RVec& x) { return x(k) + 1.0; });
  }
  auto norm2 = [dim2](const RVec& x) { return x.squaredNorm(); };
  auto nmean = [&w, dim2, &problem](const RVec& x) {
    double t = 0.0;
    for (int k = 0; k < dim2; ++k) {
      t += x(k) * x(k) * w(k);
      if (!problem.coefficients_real) t += x(dim2 + k) * x(dim2 + k) * w(k);
    }
    return t;
  };
  constraints.push_back([=](const RVec& x) { return norm2(x) - 1.0 + eps; });
  constraints.push_back([=](const RVec& x) { return 1.0 - norm2(x) + eps; });
  constraints.push_back([=](const RVec& x) { return nmean(x) - problem.nbar + eps; });
  constraints.push_back([=](const RVec& x) { return problem.nbar - nmean(x) + eps; });

  auto x_from_amplitudes = [&](const Vec& c) {
    RVec x(nvar);
    for (int k = 0; k < dim2; ++k) {
      x(k) = c(k).real();
      if (!problem.coefficients_real) x(dim2 + k) = c(k).imag();
    }
    return x;
  };

  // Start list: warm start at the noiseless catalog state, caller-provided
  // extras, then random points on the constraint manifold.
  std::vector<RVec> starts;
  starts.push_back(x_from_amplitudes(
      noiseless_ofps(OfpsSpec{problem.cutoff, problem.nbar, problem.phase_kind}).amplitudes));
  for (const Vec& s : extra_starts) {
    Vec c = s;
    project_to_constraints(c, problem.cutoff, problem.nbar);
    starts.push_back(x_from_amplitudes(c));
  }
  int r = 0;
  while (static_cast<int>(starts.size()) < config.restarts) {
    Rng rng(Rng::derive(config.seed, 1000 + r++));
    Vec c(dim2);
    for (int k = 0; k < dim2; ++k)
      c(k) = Complex(rng.normal(), problem.coefficients_real ? 0.0 : rng.normal());
    if (problem.coefficients_real)
      for (int k = 0; k < dim2; ++k) c(k) = c(k).real();
    try {
      project_to_constraints(c, problem.cutoff, problem.nbar);
    } catch (const std::domain_error&) {
      continue;
    }
    starts.push_back(x_from_amplitudes(c));
  }

  CobylaOptions copt;
  copt.rho_begin = config.rho_begin;
  copt.rho_end = config.rho_end;
  copt.max_evals = config.max_evals;
  copt.constraint_tolerance = eps;

  ProbeSearchResult best{TwoModePureState{problem.cutoff, Vec::Zero(dim2)}, -1.0};
  int total_evals = 0;
  for (int idx = 0; idx < static_cast<int>(starts.size()); ++idx) {
    CobylaResult res = cobyla_minimize(objective, constraints, starts[idx], copt);
    total_evals += res.evals;
    Vec c = amplitudes_from_x(res.x, dim2, problem.coefficients_real);
    double corr;
    try {
      corr = project_to_constraints(c, problem.cutoff, problem.nbar);
    } catch (const std::domain_error&) {
      continue;
    }
    const double f = qfi(apply_loss(TwoModePureState{problem.cutoff, c}, problem.trans), gen);
    if (f > best.qfi) {
      best.state = TwoModePureState{problem.cutoff, std::move(c)};
      best.qfi = f;
      best.restart_index = idx;
      best.converged = res.converged;
      best.correction_size = corr;
    }
  }
  if (best.qfi < 0.0) throw std::runtime_error("optimize_probe: no feasible start constructible");
  best.evals_used = total_evals;
  best.seed = config.seed;
  return best;
}

PhaseValidation random_phase_validation(const ProbeSearchResult& result,
                                        const ProbeSearchProblem& problem, int trials,
                                        uint64_t seed) {
  const Operator gen = phase_generator(problem.cutoff, problem.phase_kind);
  Rng rng(seed);
  PhaseValidation out;
  out.max_random_qfi = result.qfi;
  for (int t = 0; t < trials; ++t) {
    Vec c = result.state.amplitudes;
    for (int k = 0; k < c.size(); ++k)
      if (std::abs(c(k)) > 1e-14)
        c(k) *= std::exp(Complex(0.0, rng.uniform(0.0, 2.0 * M_PI)));
    const double f = qfi(apply_loss(TwoModePureState{problem.cutoff, std::move(c)}, problem.trans),
                         gen);
    out.max_random_qfi = std::max(out.max_random_qfi, f);
  }
  out.pass = out.max_random_qfi <= result.qfi * (1.0 + 1e-6);
  return out;
}

std::vector<SweepRow> transmission_sweep(const ProbeSearchProblem& base,
                                         const std::vector<std::pair<double, double>>& grid,
                                         const CobylaConfig& config, int threads) {
  if (grid.empty()) throw std::invalid_argument("transmission_sweep: empty grid");
  const int npts = static_cast<int>(grid.size());
  std::vector<SweepRow> rows(npts);

  auto run_point = [&](int i) {
    SweepRow row;
    row.t1 = grid[i].first;
    row.t2 = grid[i].second;
    row.seed = Rng::derive(config.seed, i);
    try {
      ProbeSearchProblem p{base.cutoff, base.nbar, Transmission{row.t1, row.t2}, base.phase_kind,
                           base.coefficients_real};
      CobylaConfig c = config;
      c.seed = row.seed;
      ProbeSearchResult res = optimize_probe(p, c);
      row.qfi = res.qfi;
      row.converged = res.converged;
      row.evals = res.evals_used;
      row.amplitudes = res.state.amplitudes;
      row.ok = true;
    } catch (const std::exception&) {
      row.ok = false;
    }
    rows[i] = std::move(row);
  };

  int nthreads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  nthreads = std::max(1, std::min(nthreads, npts));
  std::vector<std::future<void>> futs;
  for (int t = 0; t < nthreads; ++t)
    futs.push_back(std::async(std::launch::async, [&, t] {
      for (int i = t; i < npts; i += nthreads) run_point(i);
    }));
  for (auto& f : futs) f.get();
  return rows;
}

}  // namespace qphase
