#include "doctest.h"

#include "qphase/channels.hpp"
#include "qphase/fock.hpp"
#include "qphase/metrology.hpp"
#include "qphase/probes.hpp"
#include "test_util.hpp"

using namespace qphase;
using namespace qphase::testing;

TEST_CASE("Kraus completeness on a transmission grid") {
  FockCutoff c{4};
  for (int ti = 0; ti <= 10; ++ti) {
    const double t = ti / 10.0;
    auto ks = loss_kraus_set(c, t);
    Mat sum = Mat::Zero(c.dim(), c.dim());
    for (const auto& k : ks) sum += k.adjoint() * k;
    CHECK((sum - Mat::Identity(c.dim(), c.dim())).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK_THROWS_AS(loss_kraus_set(c, 1.2), std::invalid_argument);
  CHECK_THROWS_AS(loss_kraus_set(c, -0.1), std::invalid_argument);
}

TEST_CASE("lossless and fully lossy limits") {
  FockCutoff c{3};
  auto ks = loss_kraus_set(c, 1.0);
  CHECK((ks[0] - Mat::Identity(c.dim(), c.dim())).cwiseAbs().maxCoeff() < 1e-14);
  for (size_t l = 1; l < ks.size(); ++l) CHECK(ks[l].cwiseAbs().maxCoeff() < 1e-14);

  Rng rng(7);
  TwoModePureState psi = random_state(c, rng);
  DensityMatrix rho0 = apply_loss(psi, Transmission{0.0, 0.0});
  Mat vac = Mat::Zero(c.dim2(), c.dim2());
  vac(0, 0) = 1.0;
  CHECK((rho0.matrix - vac).cwiseAbs().maxCoeff() < 1e-12);

  DensityMatrix rho1 = apply_loss(psi, Transmission{1.0, 1.0});
  CHECK((rho1.matrix - pure_density(psi).matrix).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("single-mode amplitude damping worked by hand") {
  // |1> on mode a, T1 = 0.8 -> 0.8 |10><10| + 0.2 |00><00|.
  FockCutoff c{1};
  Vec amp = Vec::Zero(c.dim2());
  amp(c.flat(1, 0)) = 1.0;
  DensityMatrix rho = apply_loss(TwoModePureState{c, amp}, Transmission{0.8, 1.0});
  CHECK(rho.matrix(c.flat(1, 0), c.flat(1, 0)).real() == doctest::Approx(0.8));
  CHECK(rho.matrix(c.flat(0, 0), c.flat(0, 0)).real() == doctest::Approx(0.2));

  DensityMatrix rho_half = apply_loss(TwoModePureState{c, amp}, Transmission{0.5, 1.0});
  CHECK(rho_half.matrix(c.flat(1, 0), c.flat(1, 0)).real() == doctest::Approx(0.5));
  CHECK(rho_half.matrix(c.flat(0, 0), c.flat(0, 0)).real() == doctest::Approx(0.5));
}

TEST_CASE("Kraus path agrees with the four-mode trace-out oracle") {
  Rng rng(101);
  FockCutoff c{3};
  for (int t = 0; t < 20; ++t) {
    TwoModePureState psi = random_state(c, rng);
    Transmission tr{rng.uniform(), rng.uniform()};
    DensityMatrix a = apply_loss(psi, tr);
    DensityMatrix b = loss_via_trace_out(psi, tr);
    CHECK((a.matrix - b.matrix).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("trace-out oracle on the low-nbar catalog state at N=6") {
  OfpsSpec spec{FockCutoff{6}, 2.0};
  TwoModePureState psi = noiseless_ofps(spec);
  DensityMatrix a = apply_loss(psi, Transmission{0.8, 0.8});
  DensityMatrix b = loss_via_trace_out(psi, Transmission{0.8, 0.8});
  CHECK((a.matrix - b.matrix).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("trace-out memory guard") {
  FockCutoff c{9};
  Vec amp = Vec::Zero(c.dim2());
  amp(0) = 1.0;
  CHECK_THROWS_AS(loss_via_trace_out({c, amp}, Transmission{0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("channel output is a valid density matrix") {
  Rng rng(33);
  FockCutoff c{4};
  for (int t = 0; t < 10; ++t) {
    TwoModePureState psi = random_state(c, rng);
    DensityMatrix rho = apply_loss(psi, Transmission{rng.uniform(), rng.uniform()});
    CHECK(is_hermitian(rho.matrix, 1e-12));
    CHECK(std::abs(rho.matrix.trace().real() - 1.0) < 1e-10);
    Eigen::SelfAdjointEigenSolver<Mat> es(rho.matrix);
    CHECK(es.eigenvalues().minCoeff() > -1e-10);
  }
}

TEST_CASE("channel linearity on density-matrix input") {
  Rng rng(55);
  FockCutoff c{2};
  TwoModePureState a = random_state(c, rng), b = random_state(c, rng);
  Transmission tr{0.7, 0.85};
  Mat mix = 0.3 * pure_density(a).matrix + 0.7 * pure_density(b).matrix;
  DensityMatrix out = apply_loss(DensityMatrix{c, mix}, tr);
  Mat expected = 0.3 * apply_loss(a, tr).matrix + 0.7 * apply_loss(b, tr).matrix;
  CHECK((out.matrix - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("loss and phase shift commute at the level of the QFI") {
  Rng rng(77);
  FockCutoff c{4};
  Operator jz = build_jz(c);
  for (int t = 0; t < 5; ++t) {
    TwoModePureState psi = random_state(c, rng);
    Transmission tr{rng.uniform(0.3, 1.0), rng.uniform(0.3, 1.0)};
    auto [before, after] = loss_phase_commutation_check(psi, tr, jz, rng.uniform(0.0, 1.0));
    CHECK(std::abs(before - after) <= 1e-8 * std::max(1.0, before));
  }

  TwoModePureState psi = random_state(c, rng);
  auto [b1, a1] = loss_phase_commutation_check(psi, Transmission{1.0, 1.0}, jz, 0.4);
  const double pure_f = qfi(pure_density(psi), jz);
  CHECK(b1 == doctest::Approx(pure_f).epsilon(1e-8));
  CHECK(a1 == doctest::Approx(pure_f).epsilon(1e-8));

  auto [b0, a0] = loss_phase_commutation_check(psi, Transmission{0.0, 0.0}, jz, 0.4);
  CHECK(std::abs(b0) < 1e-10);
  CHECK(std::abs(a0) < 1e-10);
}
