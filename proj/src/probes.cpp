#include "qphase/probes.hpp"

#include <cmath>

#include "qphase/channels.hpp"
#include "qphase/fock.hpp"
#include "qphase/metrology.hpp"

namespace qphase {

namespace {

Complex phase_factor(double theta) { return std::exp(Complex(0.0, theta)); }

}  // namespace

TwoModePureState noiseless_ofps(const OfpsSpec& spec) {
  const int n = spec.cutoff.n_max;
  const double nbar = spec.nbar;
  Vec amps = Vec::Zero(spec.cutoff.dim2());
  auto at = [&](int i, int j) -> Complex& { return amps(spec.cutoff.flat(i, j)); };

  const bool linear = spec.phase_kind == PhaseKind::linear;
  if (linear) {
    if (nbar <= n) {
      at(0, 0) = std::sqrt((n - nbar) / n);
      at(0, n) = std::sqrt(nbar / (2.0 * n)) * phase_factor(spec.phase(0));
      at(n, 0) = std::sqrt(nbar / (2.0 * n)) * phase_factor(spec.phase(1));
    } else {
      at(0, n) = std::sqrt((2.0 * n - nbar) / (2.0 * n)) * phase_factor(spec.phase(0));
      at(n, 0) = std::sqrt((2.0 * n - nbar) / (2.0 * n)) * phase_factor(spec.phase(1));
      at(n, n) = std::sqrt((nbar - n) / n);
    }
  } else {
    const int mid = (4 * n + 1) / 3;  // floor((4N+1)/3) = N + floor((N+1)/3)
    if (nbar <= n) {
      at(0, 0) = std::sqrt((n - nbar) / n);
      at(0, n) = std::sqrt(nbar / (2.0 * n)) * phase_factor(spec.phase(0));
      at(n, 0) = std::sqrt(nbar / (2.0 * n)) * phase_factor(spec.phase(1));
    } else if (nbar < mid) {
      const int fl = static_cast<int>(std::floor(nbar));
      const double frac = nbar - fl;
      const int hi = fl + 1 - n;  // in [1, N]
      const int lo = fl - n;      // in [0, N]
      if (hi < 0 || hi > n || lo < 0 || lo > n)
        throw std::logic_error("noiseless_ofps: catalog index out of range");
      at(hi, n) += std::sqrt(frac / 2.0);
      at(n, hi) += std::sqrt(frac / 2.0) * phase_factor(spec.phase(0));
      at(lo, n) += std::sqrt((1.0 - frac) / 2.0) * phase_factor(spec.phase(1));
      at(n, lo) += std::sqrt((1.0 - frac) / 2.0) * phase_factor(spec.phase(2));
    } else {
      const int zeta = (n + 1) / 3;
      at(zeta, n) = std::sqrt((2.0 * n - nbar) / (2.0 * (n - zeta))) * phase_factor(spec.phase(0));
      at(n, zeta) = std::sqrt((2.0 * n - nbar) / (2.0 * (n - zeta))) * phase_factor(spec.phase(1));
      at(n, n) = std::sqrt((nbar - n - zeta) / (n - zeta));
    }
  }
  amps /= amps.norm();
  return {spec.cutoff, std::move(amps)};
}

double noiseless_ofps_qfi(const OfpsSpec& spec) {
  const int n = spec.cutoff.n_max;
  if (spec.phase_kind == PhaseKind::linear)
    return spec.nbar <= n ? spec.nbar * n : n * (2.0 * n - spec.nbar);
  const TwoModePureState psi = noiseless_ofps(spec);
  DensityMatrix rho{spec.cutoff, psi.amplitudes * psi.amplitudes.adjoint()};
  return qfi(rho, build_nonlinear_generator(spec.cutoff));
}

double taylor_qfi_first_order(const OfpsSpec& spec, double delta1, double delta2) {
  if (delta1 < 0.0 || delta1 > 0.2 || delta2 < 0.0 || delta2 > 0.2)
    throw std::invalid_argument("taylor_qfi_first_order: deltas must lie in [0, 0.2]");
  const TwoModePureState psi = noiseless_ofps(spec);
  const DensityMatrix rho = apply_loss(psi, Transmission{1.0 - delta1, 1.0 - delta2});
  const SpectralDecomposition sd = decompose(rho);
  const int n = static_cast<int>(sd.eigenvalues.size());
  const double l0 = sd.eigenvalues(n - 1);
  const double l1 = n > 1 ? sd.eigenvalues(n - 2) : 0.0;
  if ((delta1 > 0.0 || delta2 > 0.0) && l0 < 10.0 * l1)
    throw std::domain_error(
        "taylor_qfi_first_order: dominant eigenvalue not separated; delta too large");
  const Vec v = sd.eigenvectors.col(n - 1);
  const Mat g = phase_generator(spec.cutoff, spec.phase_kind).matrix;
  const Vec gv = g * v;
  const double g2 = gv.squaredNorm();
  const double g1 = v.dot(gv).real();
  return 4.0 * l0 * (g2 - g1 * g1);
}

}  // namespace qphase
