// Command-line front end: probe catalog, constrained probe optimization,
// transmission sweeps, Fisher-information curves and Bayesian simulations.
// All machine-readable outputs are deterministic under a fixed seed; each
// output set is accompanied by a <name>.manifest.json describing the run.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "qphase/bayes.hpp"
#include "qphase/channels.hpp"
#include "qphase/fock.hpp"
#include "qphase/metrology.hpp"
#include "qphase/optimize.hpp"
#include "qphase/probes.hpp"
#include "qphase/rng.hpp"

using namespace qphase;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kAmpConvention =
    "amplitudes are (re, im) pairs in row-major flat order k = i*(N+1)+j";

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const std::string& stem, const std::string& command, const json& params,
                    uint64_t seed) {
  json m;
  m["command"] = command;
  m["parameters"] = params;
  m["seed"] = seed;
  m["library_version"] = kVersion;
  m["timestamp"] = utc_now();
  std::ofstream out(stem + ".manifest.json");
  out << m.dump(2) << "\n";
}

json amplitudes_to_json(const Vec& c) {
  json arr = json::array();
  for (int k = 0; k < c.size(); ++k) arr.push_back({c(k).real(), c(k).imag()});
  return arr;
}

Vec amplitudes_from_json(const json& arr) {
  Vec c(arr.size());
  for (size_t k = 0; k < arr.size(); ++k)
    c(k) = Complex(arr[k][0].get<double>(), arr[k][1].get<double>());
  return c;
}

PhaseKind parse_kind(const std::string& s) {
  if (s == "linear") return PhaseKind::linear;
  if (s == "nonlinear") return PhaseKind::nonlinear;
  throw CLI::ValidationError("kind", "must be 'linear' or 'nonlinear'");
}

// Probe selection shared by `curves` and `simulate`: either catalog
// parameters or an amplitude file produced by `optimize`.
struct ProbeArgs {
  int n = 6;
  double nbar = 2.0;
  std::string kind = "linear";
  std::string probe_file;

  void attach(CLI::App* cmd) {
    cmd->add_option("--n", n, "Fock dimension N");
    cmd->add_option("--nbar", nbar, "mean particle number");
    cmd->add_option("--kind", kind, "phase shift kind: linear|nonlinear");
    cmd->add_option("--probe-file", probe_file,
                    "JSON amplitude file from a previous optimize run (overrides the catalog)");
  }

  TwoModePureState load() const {
    if (!probe_file.empty()) {
      std::ifstream in(probe_file);
      if (!in) throw std::runtime_error("cannot open probe file: " + probe_file);
      json j;
      in >> j;
      FockCutoff c{j.at("n").get<int>()};
      Vec amp = amplitudes_from_json(j.at("amplitudes"));
      if (amp.size() != c.dim2())
        throw std::runtime_error("probe file amplitude length does not match n");
      return {c, std::move(amp)};
    }
    return noiseless_ofps(OfpsSpec{FockCutoff{n}, nbar, parse_kind(kind)});
  }

  PhaseKind phase_kind() const { return parse_kind(kind); }
};

int default_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("QPHASE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;  // let the library pick hardware concurrency
}

int run_ofps(int n, double nbar, const std::string& kind, const std::vector<double>& phases,
             const std::string& out) {
  OfpsSpec spec{FockCutoff{n}, nbar, parse_kind(kind), phases};
  TwoModePureState psi = noiseless_ofps(spec);
  const double f = noiseless_ofps_qfi(spec);
  std::printf("N=%d nbar=%g kind=%s\n", n, nbar, kind.c_str());
  std::printf("QFI = %.6g\n", f);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      const Complex a = psi.amplitudes(spec.cutoff.flat(i, j));
      if (std::abs(a) > 1e-12) std::printf("  |%d,%d>  %.6g%+.6gi\n", i, j, a.real(), a.imag());
    }
  if (!out.empty()) {
    json j;
    j["n"] = n;
    j["nbar"] = nbar;
    j["kind"] = kind;
    j["qfi"] = f;
    j["convention"] = kAmpConvention;
    j["amplitudes"] = amplitudes_to_json(psi.amplitudes);
    std::ofstream(out) << j.dump(2) << "\n";
    write_manifest(out, "ofps",
                   {{"n", n}, {"nbar", nbar}, {"kind", kind}, {"phases", phases}, {"out", out}},
                   0);
  }
  return 0;
}

int run_optimize(int n, double nbar, double t1, double t2, const std::string& kind, int restarts,
                 int max_evals, uint64_t seed, int validate_phases, const std::string& out,
                 const std::string& amp_csv) {
  ProbeSearchProblem problem{FockCutoff{n}, nbar, Transmission{t1, t2}, parse_kind(kind)};
  CobylaConfig cfg;
  cfg.restarts = restarts;
  cfg.max_evals = max_evals;
  cfg.seed = seed;
  ProbeSearchResult r = optimize_probe(problem, cfg);

  std::printf("optimized QFI = %.6g (restart %d, %d evals, converged=%d)\n", r.qfi,
              r.restart_index, r.evals_used, static_cast<int>(r.converged));
  const double noiseless = qfi(
      apply_loss(noiseless_ofps(OfpsSpec{problem.cutoff, nbar, problem.phase_kind}), problem.trans),
      phase_generator(problem.cutoff, problem.phase_kind));
  std::printf("noiseless catalog state under the same loss: QFI = %.6g\n", noiseless);

  bool validation_ok = true;
  if (validate_phases > 0) {
    PhaseValidation v = random_phase_validation(r, problem, validate_phases, Rng::derive(seed, 1));
    validation_ok = v.pass;
    std::printf("random-phase validation over %d trials: %s (max %.6g)\n", validate_phases,
                v.pass ? "pass" : "FAIL", v.max_random_qfi);
  }

  if (!out.empty()) {
    json j;
    j["n"] = n;
    j["nbar"] = nbar;
    j["t1"] = t1;
    j["t2"] = t2;
    j["kind"] = kind;
    j["qfi"] = r.qfi;
    j["noiseless_qfi_under_loss"] = noiseless;
    j["restart_index"] = r.restart_index;
    j["evals_used"] = r.evals_used;
    j["converged"] = r.converged;
    j["correction_size"] = r.correction_size;
    j["convention"] = kAmpConvention;
    j["amplitudes"] = amplitudes_to_json(r.state.amplitudes);
    std::ofstream(out) << j.dump(2) << "\n";
    write_manifest(out, "optimize",
                   {{"n", n},
                    {"nbar", nbar},
                    {"t1", t1},
                    {"t2", t2},
                    {"kind", kind},
                    {"restarts", restarts},
                    {"max_evals", max_evals},
                    {"validate_phases", validate_phases}},
                   seed);
  }
  if (!amp_csv.empty()) {
    std::ofstream csv(amp_csv);
    csv << "i,j,amplitude\n";
    for (int i = 0; i <= n; ++i)
      for (int j = 0; j <= n; ++j) {
        char line[96];
        std::snprintf(line, sizeof(line), "%d,%d,%.17g\n", i, j,
                      r.state.amplitudes(problem.cutoff.flat(i, j)).real());
        csv << line;
      }
  }
  return validation_ok ? 0 : 1;
}

int run_sweep(int n, double nbar, const std::string& kind, double t1_min, double t1_max,
              int t1_steps, double t2_min, double t2_max, int t2_steps, int restarts,
              int max_evals, uint64_t seed, int threads, const std::string& prefix) {
  if (t1_steps < 1 || t2_steps < 1)
    throw CLI::ValidationError("steps", "grid steps must be >= 1");
  std::vector<std::pair<double, double>> grid;
  for (int i = 0; i < t1_steps; ++i)
    for (int j = 0; j < t2_steps; ++j) {
      const double a = t1_steps == 1 ? t1_min : t1_min + (t1_max - t1_min) * i / (t1_steps - 1);
      const double b = t2_steps == 1 ? t2_min : t2_min + (t2_max - t2_min) * j / (t2_steps - 1);
      grid.emplace_back(a, b);
    }

  ProbeSearchProblem base{FockCutoff{n}, nbar, Transmission{1.0, 1.0}, parse_kind(kind)};
  CobylaConfig cfg;
  cfg.restarts = restarts;
  cfg.max_evals = max_evals;
  cfg.seed = seed;
  auto rows = transmission_sweep(base, grid, cfg, default_threads(threads));

  std::ofstream csv(prefix + ".csv");
  csv << "t1,t2,qfi,converged,seed,evals\n";
  json points = json::array();
  bool all_ok = true;
  for (const SweepRow& r : rows) {
    all_ok = all_ok && r.ok;
    char line[160];
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%d,%llu,%d\n", r.t1, r.t2, r.qfi,
                  static_cast<int>(r.converged), static_cast<unsigned long long>(r.seed), r.evals);
    csv << line;
    json p;
    p["t1"] = r.t1;
    p["t2"] = r.t2;
    p["qfi"] = r.qfi;
    p["converged"] = r.converged;
    p["ok"] = r.ok;
    p["seed"] = r.seed;
    p["evals"] = r.evals;
    p["amplitudes"] = amplitudes_to_json(r.amplitudes);
    points.push_back(std::move(p));
  }
  json j;
  j["n"] = n;
  j["nbar"] = nbar;
  j["kind"] = kind;
  j["convention"] = kAmpConvention;
  j["points"] = std::move(points);
  std::ofstream(prefix + ".json") << j.dump(2) << "\n";
  write_manifest(prefix, "sweep",
                 {{"n", n},
                  {"nbar", nbar},
                  {"kind", kind},
                  {"t1", {t1_min, t1_max, t1_steps}},
                  {"t2", {t2_min, t2_max, t2_steps}},
                  {"restarts", restarts},
                  {"max_evals", max_evals}},
                 seed);
  std::printf("%zu sweep points written to %s.csv / %s.json\n", rows.size(), prefix.c_str(),
              prefix.c_str());
  return all_ok ? 0 : 1;
}

int run_curves(const ProbeArgs& probe, double t1, double t2, double phi_min, double phi_max,
               int phi_steps, double phi_hat, const std::vector<std::string>& povms,
               const std::string& out) {
  if (phi_steps < 2) throw CLI::ValidationError("phi-steps", "need at least 2 points");
  TwoModePureState psi = probe.load();
  DensityMatrix rho = apply_loss(psi, Transmission{t1, t2});
  Operator gen = phase_generator(psi.cutoff, probe.phase_kind());
  const double f = qfi(rho, gen);

  std::vector<std::pair<std::string, Povm>> sets;
  for (const std::string& name : povms) {
    if (name == "sldm")
      sets.emplace_back("cfi_sldm", sldm_povm(rho, gen, phi_hat));
    else if (name == "pc")
      sets.emplace_back("cfi_pc", pc_povm(psi.cutoff));
    else if (name == "parity")
      sets.emplace_back("cfi_parity", parity_povm(psi.cutoff));
    else
      throw CLI::ValidationError("povms", "unknown povm '" + name + "'");
  }

  std::ofstream csv(out);
  csv << "phi,qfi";
  for (const auto& [name, _] : sets) csv << "," << name;
  csv << "\n";
  for (int s = 0; s < phi_steps; ++s) {
    const double phi = phi_min + (phi_max - phi_min) * s / (phi_steps - 1);
    char head[64];
    std::snprintf(head, sizeof(head), "%.17g,%.17g", phi, f);
    csv << head;
    for (const auto& [name, povm] : sets) {
      char cell[40];
      std::snprintf(cell, sizeof(cell), ",%.17g", cfi(rho, gen, phi, povm));
      csv << cell;
    }
    csv << "\n";
  }
  write_manifest(out, "curves",
                 {{"probe_file", probe.probe_file},
                  {"n", probe.n},
                  {"nbar", probe.nbar},
                  {"kind", probe.kind},
                  {"t1", t1},
                  {"t2", t2},
                  {"phi", {phi_min, phi_max, phi_steps}},
                  {"phi_hat", phi_hat},
                  {"povms", povms}},
                 0);
  std::printf("QFI = %.6g; %d curve points written to %s\n", f, phi_steps, out.c_str());
  return 0;
}

int run_simulate(const ProbeArgs& probe, double t1, double t2, double phi_true,
                 const std::string& strategy, int pre, std::vector<int> stages, int iters,
                 int sims, uint64_t seed, int grid_points, double grid_max, int threads,
                 const std::string& prefix) {
  TwoModePureState psi = probe.load();
  EstimationInstance inst{apply_loss(psi, Transmission{t1, t2}),
                          phase_generator(psi.cutoff, probe.phase_kind())};
  PhaseGrid grid = PhaseGrid::make(0.0, grid_max, grid_points);
  const double f = qfi(inst.rho, inst.generator);

  std::vector<Trajectory> trajectories;
  if (strategy == "two-step") {
    TwoStepSchedule sch;
    sch.pre_iterations = pre;
    sch.sldm_stage_iterations = std::move(stages);
    sch.simulations = sims;
    trajectories = simulate_two_step(inst, phi_true, sch, grid, seed, default_threads(threads));
  } else if (strategy == "adaptive-pc") {
    trajectories =
        simulate_adaptive_pc(inst, phi_true, iters, sims, grid, seed, default_threads(threads));
  } else {
    throw CLI::ValidationError("strategy", "must be 'two-step' or 'adaptive-pc'");
  }

  std::ofstream jsonl(prefix + ".jsonl");
  for (size_t s = 0; s < trajectories.size(); ++s)
    for (const TrajectoryRecord& r : trajectories[s]) {
      json rec;
      rec["sim_id"] = s;
      rec["iter"] = r.iter;
      rec["stage"] = r.stage;
      rec["estimate"] = r.estimate;
      rec["variance"] = r.variance;
      rec["sq_error"] = r.sq_error;
      jsonl << rec.dump() << "\n";
    }

  const double phi_star = pc_max_cfi_phase(inst);
  const double best_pc_cfi = cfi(inst.rho, inst.generator, phi_star, pc_povm(psi.cutoff));
  RVec mse = aggregate_mse(trajectories);
  RVec mean = aggregate_mean_estimate(trajectories);
  std::ofstream csv(prefix + ".csv");
  csv << "iter,mean_sq_error,mean_estimate,crb_qfi,crb_best_cfi\n";
  for (int m = 0; m < mse.size(); ++m) {
    char line[160];
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g,%.17g\n", m + 1, mse(m), mean(m),
                  1.0 / ((m + 1) * f), 1.0 / ((m + 1) * best_pc_cfi));
    csv << line;
  }
  write_manifest(prefix, "simulate",
                 {{"probe_file", probe.probe_file},
                  {"n", probe.n},
                  {"nbar", probe.nbar},
                  {"kind", probe.kind},
                  {"t1", t1},
                  {"t2", t2},
                  {"phi_true", phi_true},
                  {"strategy", strategy},
                  {"pre", pre},
                  {"stages", stages},
                  {"iters", iters},
                  {"sims", sims},
                  {"grid_points", grid_points},
                  {"grid_max", grid_max}},
                 seed);
  std::printf("QFI = %.6g, best PC CFI = %.6g; %d trajectories written to %s.jsonl / %s.csv\n", f,
              best_pc_cfi, sims, prefix.c_str(), prefix.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-mode lossy phase estimation toolkit"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (default: QPHASE_THREADS or all cores)");

  // ofps
  auto* ofps = app.add_subcommand("ofps", "print a catalog probe state and its QFI");
  int o_n = 6;
  double o_nbar = 2.0;
  std::string o_kind = "linear", o_out;
  std::vector<double> o_phases;
  ofps->add_option("--n", o_n, "Fock dimension N")->required();
  ofps->add_option("--nbar", o_nbar, "mean particle number")->required();
  ofps->add_option("--kind", o_kind, "linear|nonlinear");
  ofps->add_option("--phases", o_phases, "relative phases (radians)");
  ofps->add_option("--out", o_out, "write the state as JSON");

  // optimize
  auto* opt = app.add_subcommand("optimize", "search the lossy-optimal probe state");
  int p_n = 6, p_restarts = 8, p_max_evals = 4000, p_validate = 0;
  double p_nbar = 2.0, p_t1 = 1.0, p_t2 = 1.0;
  std::string p_kind = "linear", p_out, p_amp_csv;
  uint64_t p_seed = 1;
  opt->add_option("--n", p_n)->required();
  opt->add_option("--nbar", p_nbar)->required();
  opt->add_option("--t1", p_t1, "transmission of mode a")->check(CLI::Range(0.0, 1.0));
  opt->add_option("--t2", p_t2, "transmission of mode b")->check(CLI::Range(0.0, 1.0));
  opt->add_option("--kind", p_kind, "linear|nonlinear");
  opt->add_option("--restarts", p_restarts);
  opt->add_option("--max-evals", p_max_evals, "objective evaluations per restart");
  opt->add_option("--seed", p_seed);
  opt->add_option("--validate-phases", p_validate, "random-phase validation trial count");
  opt->add_option("--out", p_out, "result JSON path");
  opt->add_option("--amplitudes-csv", p_amp_csv, "write i,j,amplitude rows");

  // sweep
  auto* sw = app.add_subcommand("sweep", "optimize over a transmission grid");
  int s_n = 6, s_t1_steps = 10, s_t2_steps = 10, s_restarts = 4, s_max_evals = 3000;
  double s_nbar = 2.0, s_t1_min = 0.5, s_t1_max = 1.0, s_t2_min = 0.5, s_t2_max = 1.0;
  std::string s_kind = "linear", s_prefix = "sweep";
  uint64_t s_seed = 1;
  sw->add_option("--n", s_n)->required();
  sw->add_option("--nbar", s_nbar)->required();
  sw->add_option("--kind", s_kind);
  sw->add_option("--t1-min", s_t1_min)->check(CLI::Range(0.0, 1.0));
  sw->add_option("--t1-max", s_t1_max)->check(CLI::Range(0.0, 1.0));
  sw->add_option("--t1-steps", s_t1_steps);
  sw->add_option("--t2-min", s_t2_min)->check(CLI::Range(0.0, 1.0));
  sw->add_option("--t2-max", s_t2_max)->check(CLI::Range(0.0, 1.0));
  sw->add_option("--t2-steps", s_t2_steps);
  sw->add_option("--restarts", s_restarts);
  sw->add_option("--max-evals", s_max_evals);
  sw->add_option("--seed", s_seed);
  sw->add_option("--out", s_prefix, "output file prefix");

  // curves
  auto* cv = app.add_subcommand("curves", "QFI/CFI curves over the phase");
  ProbeArgs cv_probe;
  cv_probe.attach(cv);
  double c_t1 = 0.8, c_t2 = 0.8, c_phi_min = 0.0, c_phi_max = 2.0 * M_PI, c_phi_hat = 0.2;
  int c_steps = 101;
  std::vector<std::string> c_povms = {"sldm", "pc", "parity"};
  std::string c_out = "curves.csv";
  cv->add_option("--t1", c_t1)->check(CLI::Range(0.0, 1.0));
  cv->add_option("--t2", c_t2)->check(CLI::Range(0.0, 1.0));
  cv->add_option("--phi-min", c_phi_min);
  cv->add_option("--phi-max", c_phi_max);
  cv->add_option("--phi-steps", c_steps);
  cv->add_option("--phi-hat", c_phi_hat, "construction phase of the SLDM");
  cv->add_option("--povms", c_povms, "subset of sldm,pc,parity");
  cv->add_option("--out", c_out, "output CSV path");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Monte-Carlo Bayesian phase estimation");
  ProbeArgs sim_probe;
  sim_probe.attach(sim);
  double m_t1 = 0.8, m_t2 = 0.8, m_phi_true = 0.2, m_grid_max = M_PI / 6.0;
  int m_pre = 50, m_iters = 500, m_sims = 2000, m_grid_points = 1000;
  std::vector<int> m_stages = {250, 200};
  std::string m_strategy = "two-step", m_prefix = "simulate";
  uint64_t m_seed = 1;
  sim->add_option("--t1", m_t1)->check(CLI::Range(0.0, 1.0));
  sim->add_option("--t2", m_t2)->check(CLI::Range(0.0, 1.0));
  sim->add_option("--phi-true", m_phi_true);
  sim->add_option("--strategy", m_strategy, "two-step|adaptive-pc");
  sim->add_option("--pre", m_pre, "pre-estimation iterations (two-step)");
  sim->add_option("--stages", m_stages, "SLDM stage iteration counts (two-step)");
  sim->add_option("--iters", m_iters, "total iterations (adaptive-pc)");
  sim->add_option("--sims", m_sims, "number of trajectories");
  sim->add_option("--seed", m_seed);
  sim->add_option("--grid-points", m_grid_points);
  sim->add_option("--grid-max", m_grid_max, "upper edge of the phase grid");
  sim->add_option("--out", m_prefix, "output file prefix");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ofps) return run_ofps(o_n, o_nbar, o_kind, o_phases, o_out);
    if (*opt)
      return run_optimize(p_n, p_nbar, p_t1, p_t2, p_kind, p_restarts, p_max_evals, p_seed,
                          p_validate, p_out, p_amp_csv);
    if (*sw)
      return run_sweep(s_n, s_nbar, s_kind, s_t1_min, s_t1_max, s_t1_steps, s_t2_min, s_t2_max,
                       s_t2_steps, s_restarts, s_max_evals, s_seed, threads, s_prefix);
    if (*cv)
      return run_curves(cv_probe, c_t1, c_t2, c_phi_min, c_phi_max, c_steps, c_phi_hat, c_povms,
                        c_out);
    if (*sim)
      return run_simulate(sim_probe, m_t1, m_t2, m_phi_true, m_strategy, m_pre, m_stages, m_iters,
                          m_sims, m_seed, m_grid_points, m_grid_max, threads, m_prefix);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
