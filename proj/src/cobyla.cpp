#include "qphase/cobyla.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qphase {

namespace {

struct Vertex {
  RVec x;
  double f;
  RVec g;  // constraint values
};

double max_violation(const RVec& g) {
  double v = 0.0;
  for (int k = 0; k < g.size(); ++k) v = std::max(v, -g(k));
  return v;
}

// min grad.d + (sigma/2)|d|^2  s.t.  A d + b >= 0, via Hildreth's cyclic dual
// coordinate ascent. Strict convexity stands in for the trust-region bound;
// the caller raises sigma until |d| fits the radius.
RVec solve_qp(const RVec& grad, double sigma, const RMat& a, const RVec& b, int max_pass = 120) {
  const int n = grad.size();
  const int m = static_cast<int>(b.size());
  RVec d = -grad / sigma;
  RVec lambda = RVec::Zero(m);
  RVec qk(m);
  for (int k = 0; k < m; ++k) qk(k) = a.row(k).squaredNorm();
  for (int pass = 0; pass < max_pass; ++pass) {
    double change = 0.0;
    for (int k = 0; k < m; ++k) {
      if (qk(k) < 1e-30) continue;
      const double r = a.row(k).dot(d) + b(k);
      const double lnew = std::max(0.0, lambda(k) - sigma * r / qk(k));
      const double dl = lnew - lambda(k);
      if (dl != 0.0) {
        d += a.row(k).transpose() * (dl / sigma);
        lambda(k) = lnew;
        change = std::max(change, std::abs(dl) * std::sqrt(qk(k)) / sigma);
      }
    }
    if (change < 1e-14 * (1.0 + d.norm())) break;
  }
  return d;
}

}  // namespace

CobylaResult cobyla_minimize(const ScalarFn& objective, const std::vector<ScalarFn>& constraints,
                             const RVec& x0, const CobylaOptions& opt) {
  const int n = static_cast<int>(x0.size());
  const int m = static_cast<int>(constraints.size());
  int evals = 0;

  auto evaluate = [&](const RVec& x) -> Vertex {
    Vertex v;
    v.x = x;
    v.f = objective(x);
    v.g.resize(m);
    for (int k = 0; k < m; ++k) v.g(k) = constraints[k](x);
    ++evals;
    return v;
  };

  double mu = 0.0;
  auto merit = [&](const Vertex& v) { return v.f + mu * max_violation(v.g); };

  std::vector<Vertex> simplex;
  simplex.reserve(n + 1);
  simplex.push_back(evaluate(x0));
  for (int i = 0; i < n; ++i) {
    RVec x = x0;
    x(i) += opt.rho_begin;
    simplex.push_back(evaluate(x));
  }

  // Best-so-far bookkeeping, independent of the working simplex.
  Vertex best = simplex[0];
  auto consider = [&](const Vertex& v) {
    const double vb = max_violation(best.g), vv = max_violation(v.g);
    const bool best_feas = vb <= opt.constraint_tolerance;
    const bool v_feas = vv <= opt.constraint_tolerance;
    if (v_feas && (!best_feas || v.f < best.f)) best = v;
    else if (!v_feas && !best_feas && merit(v) < merit(best)) best = v;
  };
  for (const auto& v : simplex) consider(v);

  double rho = opt.rho_begin;
  bool converged = false;

  while (evals < opt.max_evals) {
    // Keep the best-merit vertex at slot 0.
    int b = 0;
    for (int i = 1; i <= n; ++i)
      if (merit(simplex[i]) < merit(simplex[b])) b = i;
    std::swap(simplex[0], simplex[b]);

    RMat edges(n, n);
    for (int i = 0; i < n; ++i) edges.col(i) = simplex[i + 1].x - simplex[0].x;

    // Geometry control: all edges within 3*rho and no near-degenerate
    // direction, otherwise take a geometry-improving step instead.
    Eigen::JacobiSVD<RMat> svd(edges, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double smin = svd.singularValues()(n - 1);
    int longest = 0;
    double longest_norm = 0.0;
    for (int i = 0; i < n; ++i) {
      const double en = edges.col(i).norm();
      if (en > longest_norm) {
        longest_norm = en;
        longest = i;
      }
    }
    const bool degenerate = smin < 0.25 * rho;
    if (degenerate || longest_norm > 3.0 * rho) {
      int replace;
      RVec p;
      if (degenerate) {
        const RVec u = svd.matrixU().col(n - 1);
        const RVec w = svd.matrixV().col(n - 1);
        int j = 0;
        for (int i = 1; i < n; ++i)
          if (std::abs(w(i)) > std::abs(w(j))) j = i;
        replace = j;
        p = simplex[0].x + rho * u;
      } else {
        replace = longest;
        p = simplex[0].x + (rho / longest_norm) * edges.col(longest);
      }
      Vertex v = evaluate(p);
      consider(v);
      simplex[replace + 1] = std::move(v);
      continue;
    }

    // Interpolated linear models: edges^T * grad = value differences.
    RMat rhs(n, 1 + m);
    for (int i = 0; i < n; ++i) {
      rhs(i, 0) = simplex[i + 1].f - simplex[0].f;
      for (int k = 0; k < m; ++k) rhs(i, 1 + k) = simplex[i + 1].g(k) - simplex[0].g(k);
    }
    const RMat grads = edges.transpose().colPivHouseholderQr().solve(rhs);
    const RVec gf = grads.col(0);
    RMat a(m, n);
    RVec bvec(m);
    for (int k = 0; k < m; ++k) {
      a.row(k) = grads.col(1 + k).transpose();
      bvec(k) = simplex[0].g(k);
    }

    // Trust-region subproblem.
    double sigma = std::max(gf.norm() / rho, 1e-12);
    RVec d;
    for (int tries = 0; tries < 40; ++tries) {
      d = solve_qp(gf, sigma, a, bvec);
      if (d.norm() <= rho * 1.05) break;
      sigma *= 2.0;
    }

    const double viol0 = max_violation(simplex[0].g);
    RVec gmodel = bvec + a * d;
    const double viold = max_violation(gmodel);
    const double df_model = gf.dot(d);
    // Raise the merit weight until the model predicts a merit reduction.
    if (df_model + mu * (viold - viol0) >= 0.0 && viol0 - viold > 1e-15)
      mu = std::max(2.0 * mu, 1.5 * df_model / (viol0 - viold) + 1.0);
    const double predred = -(df_model + mu * (viold - viol0));

    if (predred <= 1e-13 * (1.0 + std::abs(simplex[0].f)) || d.norm() < 0.05 * rho) {
      rho *= 0.5;
      if (rho < opt.rho_end) {
        converged = true;
        break;
      }
      continue;
    }

    const double merit_before = merit(simplex[0]);
    Vertex v = evaluate(simplex[0].x + d);
    consider(v);
    const double actred = merit_before - merit(v);

    // Replace the vertex carrying the largest coordinate of d in the edge
    // basis; keeps the simplex nondegenerate.
    const RVec t = edges.colPivHouseholderQr().solve(d);
    int j = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(t(i)) > std::abs(t(j))) j = i;
    if (actred > 0.0 || merit(v) < merit(simplex[j + 1])) simplex[j + 1] = std::move(v);

    if (actred <= 0.0) {
      rho *= 0.5;
      if (rho < opt.rho_end) {
        converged = true;
        break;
      }
    }
  }

  CobylaResult res;
  res.x = best.x;
  res.f = best.f;
  res.max_violation = max_violation(best.g);
  res.evals = evals;
  res.feasible = res.max_violation <= opt.constraint_tolerance;
  res.converged = converged;
  return res;
}

}  // namespace qphase
