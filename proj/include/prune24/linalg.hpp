#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "prune24/matrix.hpp"

namespace prune24 {

/// Thrown by iterative routines that hit their iteration cap. Carries the best
/// estimate found so far.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double estimate) : std::runtime_error(what), estimate_(estimate) {}
  double estimate() const { return estimate_; }

 private:
  double estimate_;
};

/// H = X X^T / n for calibration inputs X of shape d_i x n.
Hessian hessian_from_data(const Matrix& x);

/// Tr((W - W*) H (W - W*)^T).
double layer_loss(const Matrix& w, const Matrix& w_star, const Hessian& h);

/// 2 (W - W*) H.
Matrix loss_gradient(const Matrix& w, const Matrix& w_star, const Hessian& h);

/// W H, the constant part of the gradient when W = W*.
Matrix times_hessian(const Matrix& w, const Hessian& h);

/// Largest eigenvalue by power iteration. Deterministic: starts from the
/// normalized all-ones vector (plus one fixed secondary start, keeping the larger
/// Rayleigh quotient, so a top eigenvector orthogonal to all-ones is not missed).
/// Throws ConvergenceError after `max_iter` iterations without reaching `tol`.
double max_eigenvalue(const Hessian& h, double tol = 1e-6, int max_iter = 1000);

struct Preconditioned {
  Matrix w_star;
  Hessian h;
  PrecondState state;
};

/// Floor applied to H_jj before taking the square root.
inline constexpr double kPrecondEpsilon = 1e-8;

/// W*_ij -> W*_ij s_j and H_ij -> H_ij / (s_i s_j) with s_j = sqrt(max(H_jj, eps)).
Preconditioned precondition(const Matrix& w_star, const Hessian& h);

/// Undo the column scaling: W_ij -> W_ij / s_j.
Matrix unprecondition(const Matrix& w, const PrecondState& state);

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
std::vector<double> symmetric_eigenvalues(const Matrix& m);

/// Smallest eigenvalue >= -tol.
bool is_psd(const Matrix& m, double tol = 1e-9);

/// Lower Cholesky factor of a symmetric positive definite matrix.
/// Throws std::domain_error when a pivot is not positive.
Matrix cholesky(const Matrix& m);

/// Inverse of a symmetric positive definite matrix via its Cholesky factor.
Matrix spd_inverse(const Matrix& m);

}  // namespace prune24
