#include "doctest.h"

#include <cmath>

#include "qphase/cobyla.hpp"

using namespace qphase;

TEST_CASE("1-d quadratic with an active bound") {
  auto f = [](const RVec& x) { return (x(0) - 1.0) * (x(0) - 1.0); };
  std::vector<ScalarFn> gs = {[](const RVec& x) { return x(0) - 2.0; }};
  RVec x0(1);
  x0 << 5.0;
  CobylaOptions opt;
  CobylaResult r = cobyla_minimize(f, gs, x0, opt);
  CHECK(r.feasible);
  CHECK(std::abs(r.x(0) - 2.0) < 1e-5);
  CHECK(std::abs(r.f - 1.0) < 1e-5);
}

TEST_CASE("unconstrained sphere from random starts") {
  auto f = [](const RVec& x) { return x.squaredNorm(); };
  for (double s : {3.0, -1.5, 0.7}) {
    RVec x0 = RVec::Constant(4, s);
    CobylaOptions opt;
    CobylaResult r = cobyla_minimize(f, {}, x0, opt);
    CHECK(r.x.norm() <= 1e-5);
  }
}

TEST_CASE("Rosenbrock restricted to the unit disk") {
  auto f = [](const RVec& x) {
    const double a = 1.0 - x(0);
    const double b = x(1) - x(0) * x(0);
    return a * a + 100.0 * b * b;
  };
  std::vector<ScalarFn> gs = {[](const RVec& x) { return 1.0 - x.squaredNorm(); }};

  // Independent oracle: dense grid search over the disk.
  double fbest = 1e300;
  const int res = 2001;
  for (int i = 0; i < res; ++i)
    for (int j = 0; j < res; ++j) {
      RVec p(2);
      p << -1.0 + 2.0 * i / (res - 1), -1.0 + 2.0 * j / (res - 1);
      if (p.squaredNorm() > 1.0) continue;
      fbest = std::min(fbest, f(p));
    }

  RVec x0(2);
  x0 << 0.0, 0.0;
  CobylaOptions opt;
  CobylaResult r = cobyla_minimize(f, gs, x0, opt);
  CHECK(r.feasible);
  CHECK(r.f <= fbest + 1e-3);
  CHECK(r.f >= fbest - 1e-3);  // cannot beat the oracle on a feasible point
}

TEST_CASE("infeasible problems report their violation") {
  auto f = [](const RVec& x) { return x(0) * x(0); };
  // Contradictory constraints: x >= 1 and -x >= 1.
  std::vector<ScalarFn> gs = {[](const RVec& x) { return x(0) - 1.0; },
                              [](const RVec& x) { return -x(0) - 1.0; }};
  RVec x0(1);
  x0 << 0.0;
  CobylaOptions opt;
  opt.max_evals = 2000;
  CobylaResult r = cobyla_minimize(f, gs, x0, opt);
  CHECK_FALSE(r.feasible);
  CHECK(r.max_violation > 0.1);
}
