#include "qphase/channels.hpp"

#include <cmath>

#include "qphase/fock.hpp"
#include "qphase/metrology.hpp"

namespace qphase {

namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= static_cast<double>(n - k + i) / i;
  return r;
}

using RowMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// (K_a (x) K_b) psi through the row-major reshape psi <-> M(i,j).
Vec apply_kraus_pair(const Mat& ka, const Mat& kb, const Vec& psi, int d) {
  Eigen::Map<const RowMat> m(psi.data(), d, d);
  RowMat out = ka * m * kb.transpose();
  return Eigen::Map<const Vec>(out.data(), d * d);
}

}  // namespace

std::vector<Mat> loss_kraus_set(FockCutoff cutoff, double transmission) {
  if (transmission < 0.0 || transmission > 1.0)
    throw std::invalid_argument("loss_kraus_set: T must lie in [0,1]");
  const int d = cutoff.dim();
  std::vector<Mat> ks;
  ks.reserve(d);
  for (int l = 0; l < d; ++l) {
    Mat k = Mat::Zero(d, d);
    for (int n = l; n < d; ++n) {
      const double amp2 = binomial(n, l) * std::pow(transmission, n - l) *
                          std::pow(1.0 - transmission, l);
      k(n - l, n) = std::sqrt(amp2);
    }
    ks.push_back(std::move(k));
  }
  return ks;
}

DensityMatrix apply_loss(const TwoModePureState& state, const Transmission& trans) {
  const int d = state.cutoff.dim();
  const auto ka = loss_kraus_set(state.cutoff, trans.t1);
  const auto kb = loss_kraus_set(state.cutoff, trans.t2);
  Mat rho = Mat::Zero(d * d, d * d);
  for (const auto& kl : ka)
    for (const auto& km : kb) {
      Vec v = apply_kraus_pair(kl, km, state.amplitudes, d);
      if (v.squaredNorm() < 1e-30) continue;
      rho.noalias() += v * v.adjoint();
    }
  return {state.cutoff, std::move(rho)};
}

DensityMatrix apply_loss(const DensityMatrix& rho_in, const Transmission& trans) {
  const int d = rho_in.cutoff.dim();
  const auto ka = loss_kraus_set(rho_in.cutoff, trans.t1);
  const auto kb = loss_kraus_set(rho_in.cutoff, trans.t2);
  Mat out = Mat::Zero(d * d, d * d);
  for (const auto& kl : ka)
    for (const auto& km : kb) {
      Mat kk = Mat::Zero(d * d, d * d);
      for (int i = 0; i < d; ++i)
        for (int ip = 0; ip < d; ++ip) {
          if (kl(ip, i) == Complex(0.0)) continue;
          kk.block(ip * d, i * d, d, d) = kl(ip, i) * km;
        }
      out.noalias() += kk * rho_in.matrix * kk.adjoint();
    }
  return {rho_in.cutoff, std::move(out)};
}

DensityMatrix loss_via_trace_out(const TwoModePureState& state, const Transmission& trans,
                                 bool allow_large) {
  const int n = state.cutoff.n_max;
  if (n > 8 && !allow_large)
    throw std::invalid_argument(
        "loss_via_trace_out: four-mode dimension exceeds 6561; pass allow_large to override");
  const int d = n + 1;
  const long dim4 = static_cast<long>(d) * d * d * d;

  // Fictitious beam-splitter unitary on one (signal, loss) mode pair,
  // exp(i eta/2 (a^dag c + a c^dag)), built on the pair's (N+1)^2 space.
  auto pair_unitary = [&](double transmission) {
    const double eta = 2.0 * std::acos(std::sqrt(transmission));
    Mat h = Mat::Zero(d * d, d * d);
    for (int p = 0; p + 1 < d; ++p)
      for (int q = 1; q < d; ++q) {
        const double v = std::sqrt(static_cast<double>(p + 1) * q);
        h((p + 1) * d + (q - 1), p * d + q) = v;
        h(p * d + q, (p + 1) * d + (q - 1)) = v;
      }
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const Complex im(0.0, 1.0);
    Vec phase(d * d);
    for (int k = 0; k < d * d; ++k) phase(k) = std::exp(im * (eta / 2.0) * es.eigenvalues()(k));
    return Mat(es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint());
  };

  // Mode order (a,b,c,d), flat index ((ia*d + ib)*d + ic)*d + id.
  Vec psi4 = Vec::Zero(dim4);
  for (int ia = 0; ia < d; ++ia)
    for (int ib = 0; ib < d; ++ib)
      psi4((static_cast<long>(ia) * d + ib) * d * d) = state.amplitudes(ia * d + ib);

  // Applies a two-mode unitary to the (signal, loss) pair (m_s, m_l) of psi4.
  auto apply_pair = [&](const Mat& u, int mode_s, int mode_l) {
    long stride[4] = {static_cast<long>(d) * d * d, static_cast<long>(d) * d, d, 1};
    Vec out = Vec::Zero(dim4);
    int others[2];
    int w = 0;
    for (int m = 0; m < 4; ++m)
      if (m != mode_s && m != mode_l) others[w++] = m;
    Vec sub(d * d), subo(d * d);
    for (int o0 = 0; o0 < d; ++o0)
      for (int o1 = 0; o1 < d; ++o1) {
        const long base = o0 * stride[others[0]] + o1 * stride[others[1]];
        for (int p = 0; p < d; ++p)
          for (int q = 0; q < d; ++q)
            sub(p * d + q) = psi4(base + p * stride[mode_s] + q * stride[mode_l]);
        subo.noalias() = u * sub;
        for (int p = 0; p < d; ++p)
          for (int q = 0; q < d; ++q)
            out(base + p * stride[mode_s] + q * stride[mode_l]) = subo(p * d + q);
      }
    psi4 = out;
  };

  apply_pair(pair_unitary(trans.t1), 0, 2);  // B^{T1}_{ac}
  apply_pair(pair_unitary(trans.t2), 1, 3);  // B^{T2}_{bd}

  // Partial trace over modes c and d.
  Mat rho = Mat::Zero(d * d, d * d);
  for (int ia = 0; ia < d; ++ia)
    for (int ib = 0; ib < d; ++ib)
      for (int ja = 0; ja < d; ++ja)
        for (int jb = 0; jb < d; ++jb) {
          Complex acc(0.0);
          for (int ic = 0; ic < d; ++ic)
            for (int id = 0; id < d; ++id) {
              const long ki = ((static_cast<long>(ia) * d + ib) * d + ic) * d + id;
              const long kj = ((static_cast<long>(ja) * d + jb) * d + ic) * d + id;
              acc += psi4(ki) * std::conj(psi4(kj));
            }
          rho(ia * d + ib, ja * d + jb) = acc;
        }
  return {state.cutoff, std::move(rho)};
}

std::pair<double, double> loss_phase_commutation_check(const TwoModePureState& state,
                                                       const Transmission& trans,
                                                       const Operator& generator, double phi) {
  const Operator u = phase_unitary(generator, phi);

  // Loss first, then the phase shift.
  DensityMatrix rho_loss = apply_loss(state, trans);
  Mat before = u.matrix * rho_loss.matrix * u.matrix.adjoint();
  const double f_before = qfi(DensityMatrix{state.cutoff, std::move(before)}, generator);

  // Phase shift first, then loss.
  TwoModePureState shifted{state.cutoff, u.matrix * state.amplitudes};
  const double f_after = qfi(apply_loss(shifted, trans), generator);
  return {f_before, f_after};
}

}  // namespace qphase
