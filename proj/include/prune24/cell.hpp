#pragma once

// One 2:4 cell: the r_{2:4} regularizer, the reduction to sorted nonnegative
// inputs, the three-case proximal solver with a projected-GD and an
// interior-point backend, KKT diagnostics and a brute-force oracle.
//
// Notation inside this module: z is the (sorted, nonnegative) prox input, w the
// candidate solution, and
//   f(w) = 1/2 |w - z|^2 + lambda * (w1 w2 w3 + w2 w3 w4 + w3 w4 w1 + w4 w1 w2)
//   g(w) = 1/2 sum_{i<=3} (w_i - z_i)^2 + lambda * w1 w2 w3
// g is f restricted to w4 = 0.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "prune24/matrix.hpp"

namespace prune24::cell {

using Vec4 = std::array<double, 4>;
using Vec3 = std::array<double, 3>;

/// A prox input with z1 >= z2 >= z3 >= z4 >= 0.
class SortedCell {
 public:
  /// Throws std::invalid_argument unless `z` is sorted descending, nonnegative and finite.
  explicit SortedCell(const Vec4& z);

  const Vec4& z() const { return z_; }
  double operator[](std::size_t i) const { return z_[i]; }

 private:
  Vec4 z_;
};

/// Signs and positions recorded by pos_sort. Sorted slot i came from original index perm[i].
struct SignedPerm {
  std::array<std::int8_t, 4> signs{1, 1, 1, 1};
  std::array<std::uint8_t, 4> perm{0, 1, 2, 3};
};

/// Sort |z| descending (stable on ties) and strip signs.
std::pair<SortedCell, SignedPerm> pos_sort(const Vec4& z);

/// Inverse of pos_sort: scatter w back to original positions and reapply signs.
Vec4 inv_pos_sort(const Vec4& w, const SignedPerm& sp);

enum class CaseTag { two_sparse, three_sparse, dense };

const char* case_name(CaseTag c);

/// r_{N:M}(w) = sum over (N+1)-subsets S of prod_{j in S} |w_j|, with M = w.size().
double regularizer_rNM(std::span<const double> w, int n);

double objective_f(const Vec4& w, const Vec4& z, double lambda);
double objective_g(const Vec3& w, const Vec3& z, double lambda);
Vec4 gradient_f(const Vec4& w, const Vec4& z, double lambda);
Vec3 gradient_g(const Vec3& w, const Vec3& z, double lambda);

/// Hessians of f and g. Unit diagonal; off-diagonal (i,j) is lambda times the sum
/// of the w entries not indexed by i or j.
Matrix hessian_f(const Vec4& w, double lambda);
Matrix hessian_g(const Vec3& w, double lambda);

/// Iteration cap and residual tolerance shared by the cell solvers.
struct SolverOptions {
  double tol = 1e-10;
  int max_iter = 2000;
};

/// Thrown when a GD case solve neither converges nor aborts within max_iter.
class CellSolveError : public std::runtime_error {
 public:
  CellSolveError(const std::string& what, const Vec4& last) : std::runtime_error(what), last_(last) {}
  const Vec4& last_iterate() const { return last_; }

 private:
  Vec4 last_;
};

/// Result of solving the 3-sparse or dense subproblem. `w` is empty when the
/// case cannot hold the optimum (aborted, or converged to a point that is not
/// strictly positive on the case's support).
struct CaseOutcome {
  std::optional<Vec4> w;
  bool aborted = false;
  int iterations = 0;

  explicit operator bool() const { return w.has_value(); }
};

/// Projected gradient descent from w = 0 with step 1/4. Stops early (absent)
/// as soon as the gradient norm grows. `trajectory`, when given, receives every
/// iterate after the start point.
CaseOutcome solve_case_gd(const SortedCell& z, double lambda, CaseTag which, const SolverOptions& opt = {},
                          std::vector<Vec4>* trajectory = nullptr);

/// Path-following barrier method on the convexified subproblem
///   min f(w) s.t. w >= 0, hess f(w) PSD   (resp. g for the 3-sparse case)
/// with barriers -log det hess and -sum log w_i. Present only when the
/// minimizer is a positive stationary point.
CaseOutcome solve_case_ipm(const SortedCell& z, double lambda, CaseTag which, const SolverOptions& opt = {});

enum class Backend { gd, ipm };

struct ProxResult {
  Vec4 w{};
  CaseTag case_tag = CaseTag::two_sparse;
  double objective = 0.0;
  bool three_sparse_aborted = false;
  bool dense_aborted = false;
  int three_sparse_iterations = 0;
  int dense_iterations = 0;
  /// The GD backend hit its iteration cap on some case and the IPM result was used.
  bool used_ipm_fallback = false;
};

/// Minimum of f over the three candidate cases.
ProxResult prox_enumerate(const SortedCell& z, double lambda, Backend backend = Backend::gd,
                          const SolverOptions& opt = {});

/// prox of lambda * r_{2:4} at an arbitrary 4-vector.
Vec4 prox_full(const Vec4& z, double lambda, Backend backend = Backend::gd);

struct LambdaThresholds {
  double two_sparse = 0.0;
  std::optional<double> three_sparse;
};

/// Necessary lambdas for a 2-sparse (z3 / (z1 z2)) and, given the 3-sparse
/// solution w123, a 3-sparse optimum (z4 / (w1 w2 + w2 w3 + w1 w3)).
LambdaThresholds lambda_thresholds(const SortedCell& z, const std::optional<Vec3>& w123 = std::nullopt);

struct KktReport {
  double stationarity_residual = 0.0;
  Vec4 dual{};
  bool primal_feasible = false;
  bool dual_feasible = false;
  bool complementary_slack = false;
  bool pass = false;
};

/// KKT conditions of min_{w >= 0} f(w) with multipliers nu = grad f(w).
KktReport kkt_check(const Vec4& w, const SortedCell& z, double lambda, double tol = 1e-7);

enum class SimpleReg { r0, r1, r2 };

const char* simple_reg_name(SimpleReg r);

/// Closed-form prox of the simple regularizers on a sorted cell: keeps z1, z2 and
/// hard-thresholds (R0), soft-thresholds (R1) or shrinks (R2) z3 and z4.
Vec4 prox_simple(const SortedCell& z, double lambda, SimpleReg kind);

struct OracleResult {
  Vec4 w{};
  double objective = 0.0;
};

/// Independent check for prox_enumerate: grid search plus monotone projected-GD
/// refinement. Slow; for tests only.
OracleResult brute_force_prox_oracle(const SortedCell& z, double lambda);

}  // namespace prune24::cell
