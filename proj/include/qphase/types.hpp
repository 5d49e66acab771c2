#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qphase {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

// Per-mode Fock truncation. The two-mode space has dimension (N+1)^2 and
// the flat basis index of |i,j> is k = i*(N+1)+j (row-major, fixed for all
// modules and file formats).
struct FockCutoff {
  int n_max = 1;

  explicit FockCutoff(int n) : n_max(n) {
    if (n < 1) throw std::invalid_argument("FockCutoff: N must be >= 1");
  }
  int dim() const { return n_max + 1; }
  int dim2() const { return (n_max + 1) * (n_max + 1); }
  int flat(int i, int j) const { return i * (n_max + 1) + j; }

  bool operator==(const FockCutoff& o) const { return n_max == o.n_max; }
};

struct TwoModePureState {
  FockCutoff cutoff;
  Vec amplitudes;  // length (N+1)^2, flat index k = i*(N+1)+j

  TwoModePureState(FockCutoff c, Vec amps) : cutoff(c), amplitudes(std::move(amps)) {
    if (amplitudes.size() != cutoff.dim2())
      throw std::invalid_argument("TwoModePureState: amplitude length mismatch");
  }
};

struct Operator {
  FockCutoff cutoff;
  Mat matrix;  // (N+1)^2 x (N+1)^2

  Operator(FockCutoff c, Mat m) : cutoff(c), matrix(std::move(m)) {
    if (matrix.rows() != cutoff.dim2() || matrix.cols() != cutoff.dim2())
      throw std::invalid_argument("Operator: matrix size mismatch");
  }
};

enum class PhaseKind { linear, nonlinear };

inline std::string to_string(PhaseKind k) {
  return k == PhaseKind::linear ? "linear" : "nonlinear";
}

}  // namespace qphase
