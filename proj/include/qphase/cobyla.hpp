#pragma once

#include <functional>
#include <vector>

#include "qphase/types.hpp"

namespace qphase {

using ScalarFn = std::function<double(const RVec&)>;

struct CobylaOptions {
  double rho_begin = 0.5;
  double rho_end = 1e-7;
  int max_evals = 20000;
  double constraint_tolerance = 1e-8;
};

struct CobylaResult {
  RVec x;
  double f = 0.0;
  double max_violation = 0.0;
  int evals = 0;
  bool feasible = false;
  bool converged = false;  // trust region shrank to rho_end
};

// Derivative-free trust-region method for min f(x) s.t. g_k(x) >= 0: linear
// models of f and every g interpolated on an (n+1)-vertex simplex, a
// linearized subproblem inside the trust region, and acceptance through the
// merit function f + mu * max-violation.
CobylaResult cobyla_minimize(const ScalarFn& objective, const std::vector<ScalarFn>& constraints,
                             const RVec& x0, const CobylaOptions& options);

}  // namespace qphase
