#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cell_internal.hpp"
#include "prune24/cell.hpp"

namespace prune24::cell {

namespace detail {

Vec4 case_gradient(const Vec4& w, const Vec4& z, double lambda, std::size_t k) {
  Vec4 g = gradient_f(w, z, lambda);
  if (k == 3) g[3] = 0.0;
  return g;
}

double case_objective(const Vec4& w, const Vec4& z, double lambda, std::size_t k) {
  if (k == 3) return objective_g({w[0], w[1], w[2]}, {z[0], z[1], z[2]}, lambda);
  return objective_f(w, z, lambda);
}

bool strictly_positive(const Vec4& w, const Vec4& z, std::size_t k) {
  const double threshold = kPositiveRelTol * std::max(1.0, z[0]);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(w[i] > threshold)) return false;
  }
  return true;
}

std::size_t case_dim(CaseTag which) {
  switch (which) {
    case CaseTag::dense:
      return 4;
    case CaseTag::three_sparse:
      return 3;
    case CaseTag::two_sparse:
      break;
  }
  throw std::invalid_argument("case solvers handle only the dense and three_sparse cases");
}

}  // namespace detail

CaseOutcome solve_case_gd(const SortedCell& cell, double lambda, CaseTag which, const SolverOptions& opt,
                          std::vector<Vec4>* trajectory) {
  using detail::case_gradient;
  const std::size_t k = detail::case_dim(which);
  const Vec4& z = cell.z();
  constexpr double step = 0.25;

  CaseOutcome out;
  Vec4 w{0.0, 0.0, 0.0, 0.0};
  Vec4 g = case_gradient(w, z, lambda, k);
  double gnorm = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2] + g[3] * g[3]);

  for (int it = 1; it <= opt.max_iter; ++it) {
    Vec4 next{0.0, 0.0, 0.0, 0.0};
    double moved = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      next[i] = std::max(w[i] - step * g[i], 0.0);
      moved += (next[i] - w[i]) * (next[i] - w[i]);
    }
    if (trajectory) trajectory->push_back(next);
    const Vec4 gnext = case_gradient(next, z, lambda, k);
    const double gnext_norm =
        std::sqrt(gnext[0] * gnext[0] + gnext[1] * gnext[1] + gnext[2] * gnext[2] + gnext[3] * gnext[3]);
    out.iterations = it;

    if (std::sqrt(moved) / step <= opt.tol) {
      if (detail::strictly_positive(next, z, k)) out.w = next;
      return out;
    }
    if (gnext_norm > gnorm * (1.0 + kAbortRelGuard)) {
      out.aborted = true;
      return out;
    }
    w = next;
    g = gnext;
    gnorm = gnext_norm;
  }
  throw CellSolveError("cell GD (" + std::string(case_name(which)) + ") did not converge in " +
                           std::to_string(opt.max_iter) + " iterations",
                       w);
}

}  // namespace prune24::cell
