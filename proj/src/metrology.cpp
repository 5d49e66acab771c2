#include "qphase/metrology.hpp"

#include <cmath>

#include "qphase/fock.hpp"

namespace qphase {

std::vector<int> SpectralDecomposition::support() const {
  std::vector<int> s;
  for (int i = 0; i < eigenvalues.size(); ++i)
    if (eigenvalues(i) > support_threshold) s.push_back(i);
  return s;
}

SpectralDecomposition decompose(const DensityMatrix& rho, double support_threshold) {
  if (!is_hermitian(rho.matrix, 1e-10))
    throw std::invalid_argument("decompose: density matrix not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(rho.matrix);
  return {es.eigenvalues(), es.eigenvectors(), support_threshold};
}

double qfi(const DensityMatrix& rho, const Operator& generator, double support_threshold) {
  if (!is_hermitian(generator.matrix, 1e-10))
    throw std::invalid_argument("qfi: generator must be Hermitian");
  const SpectralDecomposition sd = decompose(rho, support_threshold);
  const auto sup = sd.support();
  const Mat m = sd.eigenvectors.adjoint() * generator.matrix * sd.eigenvectors;

  double f = 0.0;
  for (int i : sup) {
    // <lambda_i|G^2|lambda_i> = sum_k |m_ik|^2 over the full space.
    const double g2 = m.row(i).squaredNorm();
    const double g1 = m(i, i).real();
    f += 4.0 * sd.eigenvalues(i) * (g2 - g1 * g1);
  }
  for (int i : sup)
    for (int j : sup) {
      if (i == j) continue;
      const double li = sd.eigenvalues(i), lj = sd.eigenvalues(j);
      f -= 8.0 * li * lj / (li + lj) * std::norm(m(i, j));
    }
  return f;
}

SldOperator sld(const DensityMatrix& rho, const Operator& generator, double phi,
                double support_threshold) {
  const SpectralDecomposition sd = decompose(rho, support_threshold);
  const Operator u = phase_unitary(generator, phi);
  // Eigenbasis of rho_phi = U rho U^dag.
  const Mat w = u.matrix * sd.eigenvectors;
  const Mat m = w.adjoint() * generator.matrix * w;

  const int n = static_cast<int>(sd.eigenvalues.size());
  Mat lbar = Mat::Zero(n, n);
  const Complex im(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double s = sd.eigenvalues(i) + sd.eigenvalues(j);
      if (s <= support_threshold) continue;
      // (d_phi rho_phi)_{ij} = i m_{ij} (lambda_j - lambda_i) in this basis.
      lbar(i, j) = 2.0 * im * m(i, j) * (sd.eigenvalues(j) - sd.eigenvalues(i)) / s;
    }
  Mat l = w * lbar * w.adjoint();
  // Hermitize away round-off.
  l = 0.5 * (l + l.adjoint().eval());
  return {std::move(l), phi};
}

Povm sldm_povm(const DensityMatrix& rho, const Operator& generator, double phi_hat,
               double support_threshold) {
  const SldOperator l = sld(rho, generator, phi_hat, support_threshold);
  Eigen::SelfAdjointEigenSolver<Mat> es(l.matrix);
  const Mat& v = cached_beam_splitter(rho.cutoff);
  Povm p;
  for (int k = 0; k < es.eigenvalues().size(); ++k) {
    Vec col = v * es.eigenvectors().col(k);
    p.elements.push_back(col * col.adjoint());
    p.labels.push_back("L" + std::to_string(k));
  }
  return p;
}

Povm parity_povm(FockCutoff cutoff) {
  const int d = cutoff.dim();
  Mat even = Mat::Zero(cutoff.dim2(), cutoff.dim2());
  for (int i = 0; i < d; i += 2)
    for (int j = 0; j < d; ++j) even(cutoff.flat(i, j), cutoff.flat(i, j)) = 1.0;
  Mat odd = Mat::Identity(cutoff.dim2(), cutoff.dim2()) - even;
  Povm p;
  p.elements = {std::move(even), std::move(odd)};
  p.labels = {"even", "odd"};
  return p;
}

Povm pc_povm(FockCutoff cutoff) {
  const int d = cutoff.dim();
  Povm p;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      Mat e = Mat::Zero(cutoff.dim2(), cutoff.dim2());
      e(cutoff.flat(i, j), cutoff.flat(i, j)) = 1.0;
      p.elements.push_back(std::move(e));
      p.labels.push_back(std::to_string(i) + "," + std::to_string(j));
    }
  return p;
}

RVec outcome_probabilities(const DensityMatrix& rho, const Operator& generator, double phi,
                           const Povm& povm) {
  const Operator u = phase_unitary(generator, phi);
  const Mat& v = cached_beam_splitter(rho.cutoff);
  const Mat sigma = v * u.matrix * rho.matrix * u.matrix.adjoint() * v.adjoint();
  RVec p(povm.size());
  for (int k = 0; k < povm.size(); ++k)
    p(k) = std::max(0.0, (sigma.cwiseProduct(povm.elements[k].transpose())).sum().real());
  const double total = p.sum();
  if (total > 0.0) p /= total;
  return p;
}

double cfi(const DensityMatrix& rho, const Operator& generator, double phi, const Povm& povm,
           double h) {
  const RVec p0 = outcome_probabilities(rho, generator, phi, povm);
  const RVec pp = outcome_probabilities(rho, generator, phi + h, povm);
  const RVec pm = outcome_probabilities(rho, generator, phi - h, povm);

  double info = 0.0;
  double fq = -1.0;  // computed lazily for the singular-outcome cap
  for (int k = 0; k < p0.size(); ++k) {
    const double dp = (pp(k) - pm(k)) / (2.0 * h);
    if (p0(k) < 1e-12) {
      if (std::abs(dp) < 1e-9) continue;  // vanishing limit (dp)^2/p -> 0
      if (fq < 0.0) fq = qfi(rho, generator);
      info += fq;  // genuinely singular contribution, capped
      continue;
    }
    info += dp * dp / p0(k);
  }
  return info;
}

}  // namespace qphase
