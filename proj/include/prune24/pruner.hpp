#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "prune24/cell.hpp"
#include "prune24/matrix.hpp"

namespace prune24 {

/// lambda_k = lambda0 * beta^k. With `adaptive`, lambda0 = lambda0_tilde / mean(|W*|).
struct LambdaSchedule {
  double lambda0 = 0.01;
  double beta = 1.01;
  bool adaptive = false;
  double lambda0_tilde = 1e-3;
};

double schedule_lambda(const LambdaSchedule& s, int k, const Matrix& w_star);

/// Binary keep-mask with the shape of W. A 1 permits a nonzero weight.
class PruneMask {
 public:
  PruneMask() = default;
  PruneMask(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), keep_(rows * cols, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::uint8_t operator()(std::size_t r, std::size_t c) const { return keep_[r * cols_ + c]; }
  std::uint8_t& operator()(std::size_t r, std::size_t c) { return keep_[r * cols_ + c]; }
  const std::uint8_t* row(std::size_t r) const { return keep_.data() + r * cols_; }
  const std::vector<std::uint8_t>& values() const { return keep_; }

  /// At most two kept entries in every aligned 4-cell.
  bool satisfies_24() const;

  bool operator==(const PruneMask&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> keep_;
};

/// Every aligned 4-cell has at most two entries with |w| > eps.
/// Throws std::invalid_argument when cols is not a multiple of 4.
bool is_24_sparse(const Matrix& w, double eps = 0.0);
PruneMask mask_of(const Matrix& w, double eps = 0.0);

/// Zero the two smallest-magnitude entries of every cell (ties: lower column pruned first).
Matrix clamp_top2(const Matrix& w);

enum class Termination { sparsity_reached, max_iter };

const char* termination_name(Termination t);

struct PruneReport {
  int iterations = 0;
  double final_lambda = 0.0;
  std::vector<std::pair<int, double>> loss_trace;
  Termination terminated_by = Termination::sparsity_reached;
  /// Cell solves where GD hit its cap and the barrier solver was used instead.
  std::int64_t ipm_fallbacks = 0;
};

struct PruneConfig {
  int max_iter = 5000;
  int gd_steps = 1000;
  cell::Backend backend = cell::Backend::gd;
  /// Record the loss every this many proximal iterations (the endpoints are always recorded).
  int trace_every = 10;
  /// Worker threads for the per-cell prox step. Output does not depend on it.
  int threads = 1;
};

struct PruneOutput {
  Matrix w;
  PruneMask mask;
  PruneReport report;
};

/// Store gamma_max(H) on `h` for the step size. If power iteration hits its cap
/// the best Rayleigh estimate is used; the step 1/(2 gamma) has a factor-2
/// stability margin, so a slight underestimate is harmless.
void cache_gamma_max(Hessian& h);

/// Proximal operator applied to one sorted, sign-stripped cell at strength lambda.
using CellProx = std::function<cell::Vec4(const cell::SortedCell&, double, std::int64_t& fallbacks)>;

/// The proximal-gradient loop shared by prune_prox and the simple-regularizer
/// baselines. Works on already preconditioned inputs; runs the masked GD phase
/// but does not unprecondition.
PruneOutput proximal_prune(const Matrix& w_star, const Hessian& h, const LambdaSchedule& s, const PruneConfig& cfg,
                           const CellProx& prox);

/// 2:4 pruning by proximal gradient with the r_{2:4} regularizer, followed by
/// masked gradient descent. Preconditions W*, H WandA style and reverses it at the end.
PruneOutput prune_prox(const Matrix& w_star, const Hessian& h, const LambdaSchedule& s = {},
                       const PruneConfig& cfg = {});

/// Gradient descent on the layer loss restricted to `mask`, step 1/(2 gamma_max(H)).
/// Entries outside the mask stay exactly zero. `losses`, when given, receives the
/// loss after every step.
Matrix masked_gd(const Matrix& w, const Matrix& w_star, const Hessian& h, const PruneMask& mask, int steps,
                 std::vector<double>* losses = nullptr);

/// masked_gd carried out in the preconditioned coordinates, for pruners that
/// produce weights in the original ones.
Matrix masked_gd_preconditioned(const Matrix& w, const Matrix& w_star, const Hessian& h, const PruneMask& mask,
                                int steps);

}  // namespace prune24
