#pragma once

#include <optional>

#include "prune24/cell.hpp"
#include "prune24/matrix.hpp"
#include "prune24/pruner.hpp"

namespace prune24 {

struct MaskedWeights {
  Matrix w;
  PruneMask mask;
};

/// S_ij = |W*_ij| * H_jj^{1/2}.
Matrix wanda_scores(const Matrix& w_star, const Hessian& h);

/// Per cell, zero the two weights with the smallest WandA score. Survivors keep their values.
MaskedWeights wanda_prune(const Matrix& w_star, const Hessian& h);

/// Default OBS damping: 0.01 * mean(diag(H)).
double default_obs_damping(const Hessian& h);

/// SparseGPT-style pruning: 4-column blocks left to right; in each block every
/// row drops the two weights with the smallest OBS error w^2 / [H^-1]_qq and the
/// error is pushed onto the weights to the right through the Cholesky factor of
/// the damped inverse Hessian. Runs in the WandA-preconditioned coordinates.
/// `damp` defaults to default_obs_damping of the preconditioned Hessian.
MaskedWeights sparsegpt_prune(const Matrix& w_star, const Hessian& h, std::optional<double> damp = std::nullopt);

/// Proximal-gradient pruning with one of the closed-form regularizers R0/R1/R2
/// in place of r_{2:4}. Same loop, preconditioning and masked GD as prune_prox.
PruneOutput simple_reg_prune(const Matrix& w_star, const Hessian& h, cell::SimpleReg kind,
                             const LambdaSchedule& s = {}, const PruneConfig& cfg = {});

struct MaskSearchResult {
  PruneMask mask;
  Matrix w;
  double loss = 0.0;
};

/// Exact optimum over all 2:4 masks (6^(cols/4) per row), solving the
/// mask-constrained least squares for each. Limited to cols <= 32.
MaskSearchResult brute_force_mask_search(const Matrix& w_star, const Hessian& h);

}  // namespace prune24
