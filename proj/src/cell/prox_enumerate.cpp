#include <cmath>
#include <stdexcept>

#include "cell_internal.hpp"
#include "prune24/cell.hpp"

namespace prune24::cell {
namespace {

CaseOutcome solve_case(const SortedCell& z, double lambda, CaseTag which, Backend backend, const SolverOptions& opt,
                       bool& used_fallback) {
  if (backend == Backend::ipm) return solve_case_ipm(z, lambda, which, opt);
  try {
    return solve_case_gd(z, lambda, which, opt);
  } catch (const CellSolveError&) {
    // Slow GD convergence happens next to case boundaries; the barrier method
    // solves the same convex problem without an iteration budget in GD terms.
    used_fallback = true;
    return solve_case_ipm(z, lambda, which, opt);
  }
}

}  // namespace

ProxResult prox_enumerate(const SortedCell& z, double lambda, Backend backend, const SolverOptions& opt) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  ProxResult r;
  if (z[0] == 0.0) return r;  // all cases coincide at w = 0
  if (lambda == 0.0) {
    r.w = z.z();
    r.case_tag = z[3] > 0.0 ? CaseTag::dense : z[2] > 0.0 ? CaseTag::three_sparse : CaseTag::two_sparse;
    return r;
  }

  r.w = {z[0], z[1], 0.0, 0.0};
  r.case_tag = CaseTag::two_sparse;
  r.objective = objective_f(r.w, z.z(), lambda);

  const CaseOutcome three = solve_case(z, lambda, CaseTag::three_sparse, backend, opt, r.used_ipm_fallback);
  r.three_sparse_aborted = three.aborted;
  r.three_sparse_iterations = three.iterations;
  if (three.w) {
    const double obj = objective_f(*three.w, z.z(), lambda);
    if (obj < r.objective) {
      r.w = *three.w;
      r.case_tag = CaseTag::three_sparse;
      r.objective = obj;
    }
  }

  const CaseOutcome dense = solve_case(z, lambda, CaseTag::dense, backend, opt, r.used_ipm_fallback);
  r.dense_aborted = dense.aborted;
  r.dense_iterations = dense.iterations;
  if (dense.w) {
    const double obj = objective_f(*dense.w, z.z(), lambda);
    if (obj < r.objective) {
      r.w = *dense.w;
      r.case_tag = CaseTag::dense;
      r.objective = obj;
    }
  }
  return r;
}

Vec4 prox_full(const Vec4& z, double lambda, Backend backend) {
  const auto [sorted, sp] = pos_sort(z);
  return inv_pos_sort(prox_enumerate(sorted, lambda, backend).w, sp);
}

}  // namespace prune24::cell
