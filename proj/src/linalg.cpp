#include "prune24/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "prune24/kernels.hpp"

namespace prune24 {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const Hessian& h) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("shape mismatch: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  if (h.dim() != a.cols()) {
    throw std::invalid_argument("hessian dim " + std::to_string(h.dim()) + " != cols " + std::to_string(a.cols()));
  }
}

double norm2(const std::vector<double>& v, const kernels::KernelTable& k) {
  return std::sqrt(k.dot(v.data(), v.data(), v.size()));
}

struct PowerResult {
  double value;
  bool converged;
};

PowerResult power_iteration(const Hessian& h, std::vector<double> v, double tol, int max_iter) {
  const auto& k = kernels::active();
  const std::size_t n = h.dim();
  const double* hm = h.matrix().data().data();
  std::vector<double> hv(n);
  double nv = norm2(v, k);
  for (double& x : v) x /= nv;
  double rayleigh = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    k.row_times_matrix(v.data(), hm, hv.data(), n);
    const double next = k.dot(v.data(), hv.data(), n);
    const double nhv = norm2(hv, k);
    if (nhv == 0.0) return {0.0, true};
    for (std::size_t i = 0; i < n; ++i) v[i] = hv[i] / nhv;
    if (it > 0 && std::abs(next - rayleigh) <= tol * std::abs(next)) return {next, true};
    rayleigh = next;
  }
  return {rayleigh, false};
}

}  // namespace

Hessian hessian_from_data(const Matrix& x) {
  if (x.cols() == 0 || x.rows() == 0) throw std::invalid_argument("no samples");
  const auto& k = kernels::active();
  const std::size_t d = x.rows();
  const std::size_t n = x.cols();
  Matrix h(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      const double v = k.dot(x.row(i).data(), x.row(j).data(), n) / static_cast<double>(n);
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return Hessian(std::move(h));
}

double layer_loss(const Matrix& w, const Matrix& w_star, const Hessian& h) {
  require_same_shape(w, w_star, h);
  const auto& k = kernels::active();
  const std::size_t n = w.cols();
  std::vector<double> delta(n), dh(n);
  double total = 0.0;
  for (std::size_t r = 0; r < w.rows(); ++r) {
    k.subtract(w.row(r).data(), w_star.row(r).data(), delta.data(), n);
    k.row_times_matrix(delta.data(), h.matrix().data().data(), dh.data(), n);
    total += k.dot(delta.data(), dh.data(), n);
  }
  return total;
}

Matrix times_hessian(const Matrix& w, const Hessian& h) {
  if (h.dim() != w.cols()) throw std::invalid_argument("hessian dim does not match cols");
  const auto& k = kernels::active();
  Matrix out(w.rows(), w.cols());
  for (std::size_t r = 0; r < w.rows(); ++r) {
    k.row_times_matrix(w.row(r).data(), h.matrix().data().data(), out.row(r).data(), w.cols());
  }
  return out;
}

Matrix loss_gradient(const Matrix& w, const Matrix& w_star, const Hessian& h) {
  require_same_shape(w, w_star, h);
  const auto& k = kernels::active();
  const std::size_t n = w.cols();
  Matrix out(w.rows(), n);
  std::vector<double> delta(n);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    k.subtract(w.row(r).data(), w_star.row(r).data(), delta.data(), n);
    auto dst = out.row(r);
    k.row_times_matrix(delta.data(), h.matrix().data().data(), dst.data(), n);
    for (double& v : dst) v *= 2.0;
  }
  return out;
}

double max_eigenvalue(const Hessian& h, double tol, int max_iter) {
  const std::size_t n = h.dim();
  if (n == 0) return 0.0;
  const PowerResult primary = power_iteration(h, std::vector<double>(n, 1.0), tol, max_iter);
  std::vector<double> alt(n);
  for (std::size_t i = 0; i < n; ++i) alt[i] = 1.0 + 0.5 * std::sin(static_cast<double>(i) + 1.0);
  const PowerResult secondary = power_iteration(h, std::move(alt), tol, max_iter);
  const double best = std::max(primary.value, secondary.value);
  if (!primary.converged || !secondary.converged) {
    throw ConvergenceError("power iteration did not converge in " + std::to_string(max_iter) + " iterations", best);
  }
  return best;
}

Preconditioned precondition(const Matrix& w_star, const Hessian& h) {
  if (h.dim() != w_star.cols()) throw std::invalid_argument("hessian dim does not match cols");
  const std::size_t n = h.dim();
  PrecondState state;
  state.diag_scales.resize(n);
  for (std::size_t j = 0; j < n; ++j) state.diag_scales[j] = std::sqrt(std::max(h(j, j), kPrecondEpsilon));

  Matrix w = w_star;
  const auto& k = kernels::active();
  for (std::size_t r = 0; r < w.rows(); ++r) k.scale_by(w.row(r).data(), state.diag_scales.data(), n);

  Matrix hm(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      hm(i, j) = h(i, j) / (state.diag_scales[i] * state.diag_scales[j]);
    }
  }
  return {std::move(w), Hessian(std::move(hm)), std::move(state)};
}

Matrix unprecondition(const Matrix& w, const PrecondState& state) {
  if (state.diag_scales.size() != w.cols()) throw std::invalid_argument("precondition state does not match cols");
  Matrix out = w;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t j = 0; j < out.cols(); ++j) out(r, j) = w(r, j) / state.diag_scales[j];
  }
  return out;
}

std::vector<double> symmetric_eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigenvalues need a square matrix");
  const std::size_t n = m.rows();
  Matrix a = m;
  double frob = 0.0;
  for (double v : a.data()) frob += v * v;
  const double threshold = 1e-30 * std::max(frob, 1e-300);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
    if (off <= threshold) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a(p, r);
          const double aqr = a(q, r);
          a(p, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

bool is_psd(const Matrix& m, double tol) {
  if (m.rows() == 0) return true;
  return symmetric_eigenvalues(m).front() >= -tol;
}

Matrix cholesky(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("cholesky needs a square matrix");
  const std::size_t n = m.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = m(j, j);
    for (std::size_t p = 0; p < j; ++p) d -= l(j, p) * l(j, p);
    if (!(d > 0.0)) throw std::domain_error("matrix is not positive definite (pivot " + std::to_string(j) + ")");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t p = 0; p < j; ++p) s -= l(i, p) * l(j, p);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Matrix spd_inverse(const Matrix& m) {
  const Matrix l = cholesky(m);
  const std::size_t n = m.rows();
  // Invert L column by column, then form L^-T L^-1.
  Matrix linv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = c; i < n; ++i) {
      double s = (i == c) ? 1.0 : 0.0;
      for (std::size_t p = c; p < i; ++p) s -= l(i, p) * linv(p, c);
      linv(i, c) = s / l(i, i);
    }
  }
  Matrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = 0.0;
      for (std::size_t p = i; p < n; ++p) s += linv(p, i) * linv(p, j);
      inv(i, j) = s;
      inv(j, i) = s;
    }
  }
  return inv;
}

}  // namespace prune24
