#include "qphase/fock.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace qphase {

Operator build_jz(FockCutoff cutoff) {
  const int d = cutoff.dim();
  Mat m = Mat::Zero(cutoff.dim2(), cutoff.dim2());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      m(cutoff.flat(i, j), cutoff.flat(i, j)) = 0.5 * (i - j);
  return {cutoff, std::move(m)};
}

Operator build_number(FockCutoff cutoff) {
  const int d = cutoff.dim();
  Mat m = Mat::Zero(cutoff.dim2(), cutoff.dim2());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      m(cutoff.flat(i, j), cutoff.flat(i, j)) = static_cast<double>(i + j);
  return {cutoff, std::move(m)};
}

Operator build_nonlinear_generator(FockCutoff cutoff) {
  const int d = cutoff.dim();
  Mat m = Mat::Zero(cutoff.dim2(), cutoff.dim2());
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      m(cutoff.flat(i, j), cutoff.flat(i, j)) = 0.5 * (i + j) * (i - j);
  return {cutoff, std::move(m)};
}

Operator build_jx(FockCutoff cutoff) {
  const int d = cutoff.dim();
  Mat m = Mat::Zero(cutoff.dim2(), cutoff.dim2());
  // <i-1,j+1| J_x |i,j> = sqrt(i(j+1))/2, plus the Hermitian partner.
  for (int i = 1; i < d; ++i)
    for (int j = 0; j + 1 < d; ++j) {
      const double v = 0.5 * std::sqrt(static_cast<double>(i) * (j + 1));
      m(cutoff.flat(i - 1, j + 1), cutoff.flat(i, j)) = v;
      m(cutoff.flat(i, j), cutoff.flat(i - 1, j + 1)) = v;
    }
  return {cutoff, std::move(m)};
}

bool is_hermitian(const Mat& m, double tol) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const Mat& m, double tol) {
  Mat p = m.adjoint() * m;
  p -= Mat::Identity(m.rows(), m.cols());
  return p.cwiseAbs().maxCoeff() <= tol;
}

bool is_diagonal(const Mat& m, double tol) {
  for (int c = 0; c < m.cols(); ++c)
    for (int r = 0; r < m.rows(); ++r)
      if (r != c && std::abs(m(r, c)) > tol) return false;
  return true;
}

Operator phase_unitary(const Operator& generator, double phi) {
  const Mat& g = generator.matrix;
  if (!is_hermitian(g, 1e-10))
    throw std::invalid_argument("phase_unitary: generator must be Hermitian");
  const Complex im(0.0, 1.0);
  if (is_diagonal(g)) {
    Mat u = Mat::Zero(g.rows(), g.cols());
    for (int k = 0; k < g.rows(); ++k) u(k, k) = std::exp(im * phi * g(k, k).real());
    return {generator.cutoff, std::move(u)};
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  Vec phase(g.rows());
  for (int k = 0; k < g.rows(); ++k) phase(k) = std::exp(im * phi * es.eigenvalues()(k));
  Mat u = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
  return {generator.cutoff, std::move(u)};
}

Operator beam_splitter_rotation(FockCutoff cutoff) {
  return phase_unitary(build_jx(cutoff), M_PI / 2.0);
}

const Mat& cached_beam_splitter(FockCutoff cutoff) {
  static std::mutex mtx;
  static std::map<int, Mat> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(cutoff.n_max);
  if (it == cache.end())
    it = cache.emplace(cutoff.n_max, beam_splitter_rotation(cutoff).matrix).first;
  return it->second;
}

double mean_particle_number(const TwoModePureState& state) {
  const int d = state.cutoff.dim();
  double nbar = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      nbar += std::norm(state.amplitudes(state.cutoff.flat(i, j))) * (i + j);
  return nbar;
}

Operator phase_generator(FockCutoff cutoff, PhaseKind kind) {
  return kind == PhaseKind::linear ? build_jz(cutoff) : build_nonlinear_generator(cutoff);
}

}  // namespace qphase
