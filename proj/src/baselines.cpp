#include "prune24/baselines.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "prune24/linalg.hpp"

namespace prune24 {
namespace {

void require_cells(const Matrix& w, const Hessian& h) {
  if (w.cols() % 4 != 0) throw std::invalid_argument("cols must be divisible by 4, got " + std::to_string(w.cols()));
  if (h.dim() != w.cols()) throw std::invalid_argument("hessian dim does not match cols");
}

// Prune the two lowest-scoring entries of each cell; stable, so on ties the
// lower column goes first.
PruneMask mask_from_scores(const Matrix& scores) {
  PruneMask mask(scores.rows(), scores.cols());
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    for (std::size_t c = 0; c < scores.cols(); c += 4) {
      std::array<std::size_t, 4> idx{c, c + 1, c + 2, c + 3};
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t a, std::size_t b) { return scores(r, a) < scores(r, b); });
      mask(r, idx[2]) = 1;
      mask(r, idx[3]) = 1;
    }
  }
  return mask;
}

// Solves A x = b for symmetric PSD A by Cholesky, treating negligible pivots as
// a null direction (that component of x is set to zero). Consistent systems
// with singular A, like H_KK x = H_KP w_P, still get an exact solution.
std::vector<double> psd_solve(std::vector<double> a, std::vector<double> b, std::size_t n) {
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(a[i * n + i]));
  const double tiny = 1e-13 * std::max(scale, 1e-300);
  std::vector<char> dead(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (std::size_t p = 0; p < j; ++p) d -= a[j * n + p] * a[j * n + p];
    if (d <= tiny) {
      dead[j] = 1;
      for (std::size_t i = j; i < n; ++i) a[i * n + j] = 0.0;
      continue;
    }
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (std::size_t p = 0; p < j; ++p) s -= a[i * n + p] * a[j * n + p];
      a[i * n + j] = s / ljj;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (dead[i]) {
      b[i] = 0.0;
      continue;
    }
    double s = b[i];
    for (std::size_t p = 0; p < i; ++p) s -= a[i * n + p] * b[p];
    b[i] = s / a[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    if (dead[i]) {
      b[i] = 0.0;
      continue;
    }
    double s = b[i];
    for (std::size_t p = i + 1; p < n; ++p) s -= a[p * n + i] * b[p];
    b[i] = s / a[i * n + i];
  }
  return b;
}

constexpr std::array<std::array<int, 2>, 6> kKeptPairs{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

}  // namespace

Matrix wanda_scores(const Matrix& w_star, const Hessian& h) {
  if (h.dim() != w_star.cols()) throw std::invalid_argument("hessian dim does not match cols");
  Matrix s(w_star.rows(), w_star.cols());
  for (std::size_t r = 0; r < s.rows(); ++r)
    for (std::size_t c = 0; c < s.cols(); ++c) s(r, c) = std::abs(w_star(r, c)) * std::sqrt(std::max(h(c, c), 0.0));
  return s;
}

MaskedWeights wanda_prune(const Matrix& w_star, const Hessian& h) {
  require_cells(w_star, h);
  MaskedWeights out{w_star, mask_from_scores(wanda_scores(w_star, h))};
  for (std::size_t r = 0; r < out.w.rows(); ++r)
    for (std::size_t c = 0; c < out.w.cols(); ++c)
      if (!out.mask(r, c)) out.w(r, c) = 0.0;
  return out;
}

double default_obs_damping(const Hessian& h) {
  double sum = 0.0;
  for (std::size_t i = 0; i < h.dim(); ++i) sum += h(i, i);
  return h.dim() ? 0.01 * sum / static_cast<double>(h.dim()) : 0.0;
}

MaskedWeights sparsegpt_prune(const Matrix& w_star, const Hessian& h, std::optional<double> damp) {
  require_cells(w_star, h);
  const Preconditioned p = precondition(w_star, h);
  const std::size_t n = p.h.dim();
  const double d = damp.value_or(default_obs_damping(p.h));

  Matrix damped = p.h.matrix();
  for (std::size_t i = 0; i < n; ++i) damped(i, i) += d;
  Matrix hinv;
  try {
    hinv = spd_inverse(damped);
  } catch (const std::domain_error&) {
    throw std::domain_error("damped hessian is singular; increase the damping");
  }
  // Upper factor U with H^-1 = U^T U. Row q of U, scaled by 1/U_qq, is the
  // inverse Hessian of the columns q.. after eliminating the ones before q.
  const Matrix lower = cholesky(hinv);
  auto u = [&](std::size_t i, std::size_t j) { return lower(j, i); };

  Matrix w = p.w_star;
  PruneMask mask(w.rows(), w.cols());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    auto row = w.row(r);
    for (std::size_t c = 0; c < n; c += 4) {
      std::array<std::size_t, 4> idx{c, c + 1, c + 2, c + 3};
      std::array<double, 4> err{};
      for (std::size_t j = 0; j < 4; ++j) {
        const double uqq = u(c + j, c + j);
        err[j] = row[c + j] * row[c + j] / (uqq * uqq);
      }
      std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return err[a - c] < err[b - c]; });
      std::array<bool, 4> prune{};
      prune[idx[0] - c] = true;
      prune[idx[1] - c] = true;
      for (std::size_t j = 0; j < 4; ++j) {
        const std::size_t q = c + j;
        if (!prune[j]) {
          mask(r, q) = 1;
          continue;
        }
        const double e = row[q] / u(q, q);
        for (std::size_t t = q + 1; t < n; ++t) row[t] -= e * u(q, t);
        row[q] = 0.0;
      }
    }
  }
  return {unprecondition(w, p.state), std::move(mask)};
}

PruneOutput simple_reg_prune(const Matrix& w_star, const Hessian& h, cell::SimpleReg kind, const LambdaSchedule& s,
                             const PruneConfig& cfg) {
  require_cells(w_star, h);
  Preconditioned p = precondition(w_star, h);
  cache_gamma_max(p.h);
  PruneOutput out = proximal_prune(p.w_star, p.h, s, cfg,
                                   [kind](const cell::SortedCell& z, double lambda, std::int64_t&) {
                                     return cell::prox_simple(z, lambda, kind);
                                   });
  out.w = unprecondition(out.w, p.state);
  return out;
}

MaskSearchResult brute_force_mask_search(const Matrix& w_star, const Hessian& h) {
  require_cells(w_star, h);
  const std::size_t n = w_star.cols();
  const std::size_t cells = n / 4;
  if (cells > 8) throw std::invalid_argument("instance too large for exhaustive mask search (cols > 32)");

  std::size_t combos = 1;
  for (std::size_t i = 0; i < cells; ++i) combos *= kKeptPairs.size();

  MaskSearchResult result{PruneMask(w_star.rows(), n), Matrix(w_star.rows(), n), 0.0};
  std::vector<std::size_t> kept, pruned;
  kept.reserve(n);
  pruned.reserve(n);
  for (std::size_t r = 0; r < w_star.rows(); ++r) {
    const auto ws = w_star.row(r);
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> best_w(n);
    std::size_t best_code = 0;
    for (std::size_t code = 0; code < combos; ++code) {
      kept.clear();
      pruned.clear();
      std::size_t rest = code;
      for (std::size_t cidx = 0; cidx < cells; ++cidx) {
        const auto& pair = kKeptPairs[rest % kKeptPairs.size()];
        rest /= kKeptPairs.size();
        for (int j = 0; j < 4; ++j) {
          const std::size_t col = 4 * cidx + static_cast<std::size_t>(j);
          (j == pair[0] || j == pair[1] ? kept : pruned).push_back(col);
        }
      }
      // Kept weights solve H_KK x = H_KP w*_P with x = w_K - w*_K.
      const std::size_t nk = kept.size();
      std::vector<double> a(nk * nk), b(nk, 0.0);
      for (std::size_t i = 0; i < nk; ++i) {
        for (std::size_t j = 0; j < nk; ++j) a[i * nk + j] = h(kept[i], kept[j]);
        for (std::size_t pcol : pruned) b[i] += h(kept[i], pcol) * ws[pcol];
      }
      const std::vector<double> x = psd_solve(std::move(a), std::move(b), nk);
      std::vector<double> delta(n, 0.0);
      for (std::size_t i = 0; i < nk; ++i) delta[kept[i]] = x[i];
      for (std::size_t pcol : pruned) delta[pcol] = -ws[pcol];
      double loss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (delta[i] == 0.0) continue;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += h(i, j) * delta[j];
        loss += delta[i] * acc;
      }
      if (loss < best) {
        best = loss;
        best_code = code;
        for (std::size_t i = 0; i < n; ++i) best_w[i] = ws[i] + delta[i];
        for (std::size_t pcol : pruned) best_w[pcol] = 0.0;
      }
    }
    std::size_t rest = best_code;
    for (std::size_t cidx = 0; cidx < cells; ++cidx) {
      const auto& pair = kKeptPairs[rest % kKeptPairs.size()];
      rest /= kKeptPairs.size();
      result.mask(r, 4 * cidx + static_cast<std::size_t>(pair[0])) = 1;
      result.mask(r, 4 * cidx + static_cast<std::size_t>(pair[1])) = 1;
    }
    for (std::size_t i = 0; i < n; ++i) result.w(r, i) = best_w[i];
    result.loss += best;
  }
  return result;
}

}  // namespace prune24
