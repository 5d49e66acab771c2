#include "doctest.h"

#include "qphase/channels.hpp"
#include "qphase/fock.hpp"
#include "qphase/metrology.hpp"
#include "qphase/optimize.hpp"
#include "qphase/probes.hpp"
#include "test_util.hpp"

using namespace qphase;
using namespace qphase::testing;

namespace {

CobylaConfig quick_config(int restarts = 2, int max_evals = 2500) {
  CobylaConfig c;
  c.restarts = restarts;
  c.max_evals = max_evals;
  c.rho_begin = 0.3;
  c.rho_end = 1e-6;
  c.seed = 2024;
  return c;
}

}  // namespace

TEST_CASE("constraint projection hits norm and nbar exactly") {
  FockCutoff c{4};
  Rng rng(5);
  Vec v(c.dim2());
  for (int k = 0; k < v.size(); ++k) v(k) = Complex(rng.normal(), rng.normal());
  const Vec orig = v;
  const double corr = project_to_constraints(v, c, 3.2);
  CHECK(std::abs(v.norm() - 1.0) < 1e-12);
  CHECK(mean_particle_number({c, v}) == doctest::Approx(3.2).epsilon(1e-10));
  CHECK(corr == doctest::Approx((v - orig).norm()));

  Vec vac = Vec::Zero(c.dim2());
  vac(0) = 1.0;
  CHECK_THROWS_AS(project_to_constraints(vac, c, 3.0), std::domain_error);
}

TEST_CASE("lossless search recovers the closed-form optimum at small N") {
  ProbeSearchProblem p{FockCutoff{3}, 1.5, Transmission{1.0, 1.0}};
  ProbeSearchResult r = optimize_probe(p, quick_config());
  CHECK(r.qfi >= 1.5 * 3 * (1.0 - 1e-4));
  CHECK(std::abs(r.state.amplitudes.norm() - 1.0) < 1e-10);
  CHECK(mean_particle_number(r.state) == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(r.correction_size < 1e-4);
}

TEST_CASE("lossy search beats the noiseless catalog state under the same loss") {
  FockCutoff c{4};
  const Transmission tr{0.8, 0.8};
  ProbeSearchProblem p{c, 2.0, tr};
  ProbeSearchResult r = optimize_probe(p, quick_config(3, 3000));

  Operator jz = build_jz(c);
  const double baseline = qfi(apply_loss(noiseless_ofps({c, 2.0}), tr), jz);
  CHECK(r.qfi > baseline + 1e-3);
  CHECK(r.qfi < 2.0 * 4);  // strictly below the lossless optimum nbar*N
}

TEST_CASE("random-phase validation") {
  ProbeSearchProblem p{FockCutoff{3}, 1.5, Transmission{0.8, 0.8}};
  ProbeSearchResult r = optimize_probe(p, quick_config(2, 2500));

  PhaseValidation none = random_phase_validation(r, p, 0);
  CHECK(none.pass);
  CHECK(none.max_random_qfi == doctest::Approx(r.qfi));

  PhaseValidation v = random_phase_validation(r, p, 300);
  CHECK(v.pass);
  CHECK(v.max_random_qfi <= r.qfi * (1.0 + 1e-6));
}

TEST_CASE("transmission sweep mechanics") {
  ProbeSearchProblem p{FockCutoff{2}, 1.0, Transmission{1.0, 1.0}};
  std::vector<std::pair<double, double>> grid = {{1.0, 1.0}, {0.7, 0.7}, {0.0, 0.0}};
  auto rows = transmission_sweep(p, grid, quick_config(2, 1500), 1);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].ok);
  CHECK(rows[0].qfi == doctest::Approx(2.0).epsilon(1e-3));  // nbar*N = 2 at T=1
  CHECK(rows[1].ok);
  CHECK(rows[1].qfi < rows[0].qfi);
  CHECK(rows[2].qfi < 1e-6);  // vacuum output carries no phase information

  CHECK_THROWS_AS(transmission_sweep(p, {}, quick_config(1, 100), 1), std::invalid_argument);
}

TEST_CASE("optimizer results are reproducible under a fixed seed") {
  ProbeSearchProblem p{FockCutoff{2}, 1.2, Transmission{0.9, 0.9}};
  ProbeSearchResult a = optimize_probe(p, quick_config(2, 1200));
  ProbeSearchResult b = optimize_probe(p, quick_config(2, 1200));
  CHECK(a.qfi == b.qfi);
  CHECK((a.state.amplitudes - b.state.amplitudes).cwiseAbs().maxCoeff() == 0.0);
}
