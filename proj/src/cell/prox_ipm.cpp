// Barrier method for the convexified case problems
//   min f(w)  s.t.  w >= 0,  hess f(w) PSD      (dense, k = 4)
//   min g(w)  s.t.  w >= 0,  hess g(w) PSD      (3-sparse, k = 3)
// using phi_t(w) = t f(w) - log det hess f(w) - sum log w_i.
//
// hess f(w) = I + lambda * sum_m w_m B_m, where B_m has ones at (i, j) for
// i != j and m not in {i, j}. The same formula gives hess g for k = 3.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cell_internal.hpp"
#include "prune24/cell.hpp"

namespace prune24::cell {
namespace {

using Mat4 = std::array<std::array<double, 4>, 4>;

constexpr double kNewtonDecrement = 1e-14;
constexpr int kMaxNewton = 200;
constexpr int kMaxPolish = 60;

bool in_b(std::size_t m, std::size_t i, std::size_t j) { return i != j && m != i && m != j; }

Mat4 constraint_matrix(const Vec4& w, double lambda, std::size_t k) {
  Mat4 f{};
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) total += w[i];
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) f[i][j] = (i == j) ? 1.0 : lambda * (total - w[i] - w[j]);
  }
  return f;
}

// In-place lower Cholesky of the leading k x k block. False when not PD.
bool cholesky_k(Mat4& a, std::size_t k) {
  for (std::size_t j = 0; j < k; ++j) {
    double d = a[j][j];
    for (std::size_t p = 0; p < j; ++p) d -= a[j][p] * a[j][p];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    a[j][j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < k; ++i) {
      double s = a[i][j];
      for (std::size_t p = 0; p < j; ++p) s -= a[i][p] * a[j][p];
      a[i][j] = s / a[j][j];
    }
  }
  return true;
}

Vec4 cholesky_solve(const Mat4& l, const Vec4& b, std::size_t k) {
  Vec4 y{};
  for (std::size_t i = 0; i < k; ++i) {
    double s = b[i];
    for (std::size_t p = 0; p < i; ++p) s -= l[i][p] * y[p];
    y[i] = s / l[i][i];
  }
  Vec4 x{};
  for (std::size_t ii = k; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t p = ii + 1; p < k; ++p) s -= l[p][ii] * x[p];
    x[ii] = s / l[ii][ii];
  }
  return x;
}

double log_det_from_chol(const Mat4& l, std::size_t k) {
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += std::log(l[i][i]);
  return 2.0 * s;
}

struct BarrierEval {
  bool feasible = false;
  double value = 0.0;
};

BarrierEval barrier_value(const Vec4& w, const Vec4& z, double lambda, double t, std::size_t k) {
  BarrierEval e;
  double logs = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(w[i] > 0.0)) return e;
    logs += std::log(w[i]);
  }
  Mat4 f = constraint_matrix(w, lambda, k);
  if (!cholesky_k(f, k)) return e;
  e.feasible = true;
  e.value = t * detail::case_objective(w, z, lambda, k) - log_det_from_chol(f, k) - logs;
  return e;
}

bool strictly_feasible(const Vec4& w, double lambda, std::size_t k) {
  for (std::size_t i = 0; i < k; ++i) {
    if (!(w[i] > 0.0)) return false;
  }
  Mat4 f = constraint_matrix(w, lambda, k);
  return cholesky_k(f, k);
}

// Gradient and Hessian of phi_t at a strictly feasible w.
void barrier_derivatives(const Vec4& w, const Vec4& z, double lambda, double t, std::size_t k, Vec4& grad, Mat4& hess) {
  Mat4 l = constraint_matrix(w, lambda, k);
  cholesky_k(l, k);
  Mat4 finv{};
  for (std::size_t c = 0; c < k; ++c) {
    Vec4 e{};
    e[c] = 1.0;
    const Vec4 col = cholesky_solve(l, e, k);
    for (std::size_t r = 0; r < k; ++r) finv[r][c] = col[r];
  }

  const Vec4 gf = detail::case_gradient(w, z, lambda, k);
  const Mat4 hf = constraint_matrix(w, lambda, k);  // hess f coincides with the LMI matrix
  for (std::size_t m = 0; m < k; ++m) {
    double tr = 0.0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (in_b(m, i, j)) tr += finv[j][i];
    grad[m] = t * gf[m] - lambda * tr - 1.0 / w[m];
  }
  // tr(F^-1 B_m F^-1 B_l) = sum_{(i,j) in B_m, (p,q) in B_l} Finv[j][p] Finv[q][i]
  for (std::size_t m = 0; m < k; ++m) {
    for (std::size_t n = m; n < k; ++n) {
      double tr = 0.0;
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
          if (!in_b(m, i, j)) continue;
          for (std::size_t p = 0; p < k; ++p)
            for (std::size_t q = 0; q < k; ++q)
              if (in_b(n, p, q)) tr += finv[j][p] * finv[q][i];
        }
      const double v = t * hf[m][n] + lambda * lambda * tr + (m == n ? 1.0 / (w[m] * w[m]) : 0.0);
      hess[m][n] = v;
      hess[n][m] = v;
    }
  }
}

void center(Vec4& w, const Vec4& z, double lambda, double t, std::size_t k) {
  for (int it = 0; it < kMaxNewton; ++it) {
    Vec4 grad{};
    Mat4 hess{};
    barrier_derivatives(w, z, lambda, t, k, grad, hess);
    Mat4 l = hess;
    if (!cholesky_k(l, k)) {
      // Numerically indefinite: fall back to a damped gradient direction.
      double scale = 0.0;
      for (std::size_t i = 0; i < k; ++i) scale = std::max(scale, std::abs(hess[i][i]));
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) l[i][j] = (i == j) ? scale : 0.0;
      }
      cholesky_k(l, k);
    }
    Vec4 neg{};
    for (std::size_t i = 0; i < k; ++i) neg[i] = -grad[i];
    const Vec4 dir = cholesky_solve(l, neg, k);
    double decrement = 0.0;
    for (std::size_t i = 0; i < k; ++i) decrement -= grad[i] * dir[i];
    if (decrement * 0.5 <= kNewtonDecrement) return;

    double alpha = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (dir[i] < 0.0) alpha = std::min(alpha, -0.99 * w[i] / dir[i]);
    }
    const BarrierEval here = barrier_value(w, z, lambda, t, k);
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      Vec4 trial = w;
      for (std::size_t i = 0; i < k; ++i) trial[i] += alpha * dir[i];
      const BarrierEval there = barrier_value(trial, z, lambda, t, k);
      if (there.feasible && there.value <= here.value - 0.25 * alpha * decrement) {
        w = trial;
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) return;
  }
}

// Unconstrained Newton on f from the barrier solution. Converges to the
// stationary point when the constrained minimizer is interior.
Vec4 polish(Vec4 w, const Vec4& z, double lambda, std::size_t k) {
  const double scale = std::max(1.0, z[0]);
  for (int it = 0; it < kMaxPolish; ++it) {
    const Vec4 g = detail::case_gradient(w, z, lambda, k);
    double gmax = 0.0;
    for (std::size_t i = 0; i < k; ++i) gmax = std::max(gmax, std::abs(g[i]));
    if (gmax <= 1e-15 * scale) break;
    Mat4 h = constraint_matrix(w, lambda, k);
    if (!cholesky_k(h, k)) break;
    Vec4 neg{};
    for (std::size_t i = 0; i < k; ++i) neg[i] = -g[i];
    const Vec4 dir = cholesky_solve(h, neg, k);
    for (std::size_t i = 0; i < k; ++i) w[i] += dir[i];
  }
  return w;
}

}  // namespace

CaseOutcome solve_case_ipm(const SortedCell& cell, double lambda, CaseTag which, const SolverOptions& opt) {
  const std::size_t k = detail::case_dim(which);
  const Vec4& z = cell.z();

  Vec4 w{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < k; ++i) w[i] = std::min(z[i], 0.1);
  if (!strictly_feasible(w, lambda, k)) {
    // hess is I plus off-diagonals of at most 2 lambda eps; keep them well below 1/(k-1).
    const double eps = std::min(1e-6, 0.25 / (std::max(lambda, 1.0) * static_cast<double>(k)));
    for (std::size_t i = 0; i < k; ++i) w[i] = eps;
    if (!strictly_feasible(w, lambda, k)) throw std::runtime_error("barrier start is infeasible");
  }

  const double barrier_param = 2.0 * static_cast<double>(k);
  double t = 1.0;
  int outer = 0;
  for (;;) {
    center(w, z, lambda, t, k);
    ++outer;
    if (barrier_param / t < opt.tol) break;
    t *= 10.0;
  }

  CaseOutcome out;
  out.iterations = outer;
  const Vec4 p = polish(w, z, lambda, k);
  const Vec4 g = detail::case_gradient(p, z, lambda, k);
  double gmax = 0.0;
  for (std::size_t i = 0; i < k; ++i) gmax = std::max(gmax, std::abs(g[i]));
  Mat4 h = constraint_matrix(p, lambda, k);
  const bool stationary = gmax <= 1e-9 * std::max(1.0, z[0]);
  if (stationary && detail::strictly_positive(p, z, k) && cholesky_k(h, k)) out.w = p;
  return out;
}

}  // namespace prune24::cell
