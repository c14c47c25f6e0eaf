#include "prune24/pruner.hpp"

#include <array>
#include <atomic>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "parallel.hpp"
#include "prune24/kernels.hpp"
#include "prune24/linalg.hpp"

namespace prune24 {
namespace {

void require_cells(const Matrix& w) {
  if (w.cols() % 4 != 0) throw std::invalid_argument("cols must be divisible by 4, got " + std::to_string(w.cols()));
}

double step_from(const Hessian& h) {
  double gamma = 0.0;
  if (h.gamma_max()) {
    gamma = *h.gamma_max();
  } else {
    Hessian copy = h;
    cache_gamma_max(copy);
    gamma = *copy.gamma_max();
  }
  // eta = 1 / (2 gamma); kernels take the full factor 2 eta.
  return gamma > 0.0 ? 1.0 / gamma : 0.0;
}

void gradient_step(Matrix& w, const Matrix& target, const Hessian& h, double step, std::vector<double>& scratch) {
  const auto& k = kernels::active();
  const std::size_t n = w.cols();
  const double* hm = h.matrix().data().data();
  for (std::size_t r = 0; r < w.rows(); ++r) {
    k.row_times_matrix(w.row(r).data(), hm, scratch.data(), n);
    k.gradient_step(w.row(r).data(), scratch.data(), target.row(r).data(), step, n);
  }
}

}  // namespace

void cache_gamma_max(Hessian& h) {
  try {
    h.set_gamma_max(max_eigenvalue(h));
  } catch (const ConvergenceError& e) {
    h.set_gamma_max(e.estimate());
  }
}

double schedule_lambda(const LambdaSchedule& s, int k, const Matrix& w_star) {
  if (k < 0) throw std::invalid_argument("schedule index must be >= 0");
  if (!(s.beta > 1.0)) throw std::invalid_argument("lambda schedule needs beta > 1");
  double lambda0 = s.lambda0;
  if (s.adaptive) {
    if (!(s.lambda0_tilde > 0.0)) throw std::invalid_argument("adaptive schedule needs lambda0_tilde > 0");
    double sum = 0.0;
    for (double v : w_star.data()) sum += std::abs(v);
    const double mean = w_star.size() ? sum / static_cast<double>(w_star.size()) : 0.0;
    if (mean == 0.0) throw std::invalid_argument("adaptive schedule needs mean(|W*|) > 0");
    lambda0 = s.lambda0_tilde / mean;
  } else if (!(lambda0 > 0.0)) {
    throw std::invalid_argument("lambda schedule needs lambda0 > 0");
  }
  return lambda0 * std::pow(s.beta, k);
}

bool PruneMask::satisfies_24() const {
  if (cols_ % 4 != 0) return false;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; c += 4) {
      const int kept = keep_[r * cols_ + c] + keep_[r * cols_ + c + 1] + keep_[r * cols_ + c + 2] + keep_[r * cols_ + c + 3];
      if (kept > 2) return false;
    }
  }
  return true;
}

bool is_24_sparse(const Matrix& w, double eps) {
  require_cells(w);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto row = w.row(r);
    for (std::size_t c = 0; c < w.cols(); c += 4) {
      int nonzero = 0;
      for (std::size_t j = c; j < c + 4; ++j) nonzero += std::abs(row[j]) > eps;
      if (nonzero > 2) return false;
    }
  }
  return true;
}

PruneMask mask_of(const Matrix& w, double eps) {
  require_cells(w);
  PruneMask m(w.rows(), w.cols());
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c) m(r, c) = std::abs(w(r, c)) > eps ? 1 : 0;
  return m;
}

Matrix clamp_top2(const Matrix& w) {
  require_cells(w);
  Matrix out = w;
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < w.cols(); c += 4) {
      std::array<std::size_t, 4> idx{c, c + 1, c + 2, c + 3};
      std::stable_sort(idx.begin(), idx.end(),
                       [&](std::size_t a, std::size_t b) { return std::abs(w(r, a)) < std::abs(w(r, b)); });
      out(r, idx[0]) = 0.0;
      out(r, idx[1]) = 0.0;
    }
  }
  return out;
}

const char* termination_name(Termination t) {
  return t == Termination::sparsity_reached ? "sparsity_reached" : "max_iter";
}

PruneOutput proximal_prune(const Matrix& w_star, const Hessian& h, const LambdaSchedule& s, const PruneConfig& cfg,
                           const CellProx& prox) {
  require_cells(w_star);
  if (h.dim() != w_star.cols()) throw std::invalid_argument("hessian dim does not match cols");
  if (cfg.max_iter < 0 || cfg.gd_steps < 0) throw std::invalid_argument("iteration counts must be >= 0");

  const double step = step_from(h);
  const Matrix target = times_hessian(w_star, h);
  const std::size_t cells_per_row = w_star.cols() / 4;
  const int trace_every = std::max(cfg.trace_every, 1);

  PruneOutput out;
  PruneReport& report = out.report;
  Matrix w = w_star;
  std::vector<double> scratch(w.cols());
  report.loss_trace.emplace_back(0, layer_loss(w, w_star, h));
  report.final_lambda = schedule_lambda(s, 0, w_star);

  int k = 0;
  std::atomic<std::int64_t> fallbacks{0};
  while (!is_24_sparse(w) && k < cfg.max_iter) {
    gradient_step(w, target, h, step, scratch);
    const double lambda = schedule_lambda(s, k, w_star);
    detail::parallel_for(w.rows(), cfg.threads, [&](std::size_t r) {
      auto row = w.row(r);
      std::int64_t local = 0;
      for (std::size_t c = 0; c < cells_per_row; ++c) {
        double* cellp = row.data() + 4 * c;
        const auto [sorted, sp] = cell::pos_sort({cellp[0], cellp[1], cellp[2], cellp[3]});
        const cell::Vec4 res = cell::inv_pos_sort(prox(sorted, lambda, local), sp);
        for (std::size_t j = 0; j < 4; ++j) cellp[j] = res[j];
      }
      if (local) fallbacks += local;
    });
    report.final_lambda = lambda;
    ++k;
    if (k % trace_every == 0) report.loss_trace.emplace_back(k, layer_loss(w, w_star, h));
  }
  report.iterations = k;
  report.ipm_fallbacks = fallbacks.load();
  if (is_24_sparse(w)) {
    report.terminated_by = Termination::sparsity_reached;
  } else {
    report.terminated_by = Termination::max_iter;
    w = clamp_top2(w);
  }
  if (report.loss_trace.back().first != k || report.terminated_by == Termination::max_iter) {
    report.loss_trace.emplace_back(k, layer_loss(w, w_star, h));
  }

  out.mask = mask_of(w);
  std::vector<double> gd_losses;
  w = masked_gd(w, w_star, h, out.mask, cfg.gd_steps, &gd_losses);
  for (std::size_t i = 0; i < gd_losses.size(); ++i) {
    const int it = k + static_cast<int>(i) + 1;
    if ((i + 1) % static_cast<std::size_t>(trace_every) == 0 || i + 1 == gd_losses.size()) {
      report.loss_trace.emplace_back(it, gd_losses[i]);
    }
  }
  out.w = std::move(w);
  return out;
}

PruneOutput prune_prox(const Matrix& w_star, const Hessian& h, const LambdaSchedule& s, const PruneConfig& cfg) {
  require_cells(w_star);
  Preconditioned p = precondition(w_star, h);
  cache_gamma_max(p.h);
  const cell::Backend backend = cfg.backend;
  PruneOutput out = proximal_prune(p.w_star, p.h, s, cfg,
                                   [backend](const cell::SortedCell& z, double lambda, std::int64_t& fallbacks) {
                                     const cell::ProxResult r = cell::prox_enumerate(z, lambda, backend);
                                     fallbacks += r.used_ipm_fallback;
                                     return r.w;
                                   });
  out.w = unprecondition(out.w, p.state);
  return out;
}

Matrix masked_gd(const Matrix& w, const Matrix& w_star, const Hessian& h, const PruneMask& mask, int steps,
                 std::vector<double>* losses) {
  if (mask.rows() != w.rows() || mask.cols() != w.cols()) throw std::invalid_argument("mask shape does not match W");
  if (w.rows() != w_star.rows() || w.cols() != w_star.cols()) throw std::invalid_argument("shape mismatch W vs W*");
  for (std::size_t r = 0; r < w.rows(); ++r)
    for (std::size_t c = 0; c < w.cols(); ++c)
      if (!mask(r, c) && w(r, c) != 0.0) throw std::invalid_argument("W does not respect the mask");

  Matrix out = w;
  if (steps <= 0) return out;
  const double step = step_from(h);
  const Matrix target = times_hessian(w_star, h);
  const auto& k = kernels::active();
  const std::size_t n = w.cols();
  const double* hm = h.matrix().data().data();
  std::vector<double> scratch(n);
  for (int s = 0; s < steps; ++s) {
    for (std::size_t r = 0; r < out.rows(); ++r) {
      k.row_times_matrix(out.row(r).data(), hm, scratch.data(), n);
      k.masked_gradient_step(out.row(r).data(), scratch.data(), target.row(r).data(), mask.row(r), step, n);
    }
    if (losses) losses->push_back(layer_loss(out, w_star, h));
  }
  return out;
}

Matrix masked_gd_preconditioned(const Matrix& w, const Matrix& w_star, const Hessian& h, const PruneMask& mask,
                                int steps) {
  Preconditioned p = precondition(w_star, h);
  cache_gamma_max(p.h);
  Matrix scaled = w;
  for (std::size_t r = 0; r < scaled.rows(); ++r)
    for (std::size_t c = 0; c < scaled.cols(); ++c) scaled(r, c) *= p.state.diag_scales[c];
  return unprecondition(masked_gd(scaled, p.w_star, p.h, mask, steps), p.state);
}

}  // namespace prune24
