#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "prune24/cell.hpp"

namespace prune24::cell {

SortedCell::SortedCell(const Vec4& z) : z_(z) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (!std::isfinite(z[i]) || z[i] < 0.0) throw std::invalid_argument("sorted cell needs finite nonnegative entries");
    if (i > 0 && z[i] > z[i - 1]) throw std::invalid_argument("sorted cell must be descending");
  }
}

std::pair<SortedCell, SignedPerm> pos_sort(const Vec4& z) {
  SignedPerm sp;
  std::array<std::uint8_t, 4> idx{0, 1, 2, 3};
  std::stable_sort(idx.begin(), idx.end(), [&](std::uint8_t a, std::uint8_t b) { return std::abs(z[a]) > std::abs(z[b]); });
  Vec4 sorted{};
  for (std::size_t i = 0; i < 4; ++i) {
    sp.perm[i] = idx[i];
    sp.signs[i] = std::signbit(z[idx[i]]) && z[idx[i]] != 0.0 ? -1 : 1;
    sorted[i] = std::abs(z[idx[i]]);
  }
  return {SortedCell(sorted), sp};
}

Vec4 inv_pos_sort(const Vec4& w, const SignedPerm& sp) {
  Vec4 out{};
  for (std::size_t i = 0; i < 4; ++i) out[sp.perm[i]] = sp.signs[i] < 0 && w[i] != 0.0 ? -w[i] : w[i];
  return out;
}

const char* case_name(CaseTag c) {
  switch (c) {
    case CaseTag::two_sparse:
      return "two_sparse";
    case CaseTag::three_sparse:
      return "three_sparse";
    case CaseTag::dense:
      return "dense";
  }
  return "unknown";
}

double regularizer_rNM(std::span<const double> w, int n) {
  const int m = static_cast<int>(w.size());
  if (n < 1 || n >= m) throw std::invalid_argument("regularizer needs 1 <= N < M");
  // Elementary symmetric polynomial e_{N+1}(|w|) by the usual one-pass recurrence.
  std::vector<double> e(static_cast<std::size_t>(n) + 2, 0.0);
  e[0] = 1.0;
  for (double v : w) {
    const double a = std::abs(v);
    for (int k = n + 1; k >= 1; --k) e[k] += a * e[k - 1];
  }
  return e[static_cast<std::size_t>(n) + 1];
}

double objective_f(const Vec4& w, const Vec4& z, double lambda) {
  double q = 0.0;
  for (std::size_t i = 0; i < 4; ++i) q += (w[i] - z[i]) * (w[i] - z[i]);
  const double r = w[0] * w[1] * w[2] + w[1] * w[2] * w[3] + w[2] * w[3] * w[0] + w[3] * w[0] * w[1];
  return 0.5 * q + lambda * r;
}

double objective_g(const Vec3& w, const Vec3& z, double lambda) {
  double q = 0.0;
  for (std::size_t i = 0; i < 3; ++i) q += (w[i] - z[i]) * (w[i] - z[i]);
  return 0.5 * q + lambda * w[0] * w[1] * w[2];
}

Vec4 gradient_f(const Vec4& w, const Vec4& z, double lambda) {
  const double p01 = w[0] * w[1], p02 = w[0] * w[2], p03 = w[0] * w[3];
  const double p12 = w[1] * w[2], p13 = w[1] * w[3], p23 = w[2] * w[3];
  return {w[0] - z[0] + lambda * (p12 + p13 + p23), w[1] - z[1] + lambda * (p02 + p03 + p23),
          w[2] - z[2] + lambda * (p01 + p03 + p13), w[3] - z[3] + lambda * (p01 + p02 + p12)};
}

Vec3 gradient_g(const Vec3& w, const Vec3& z, double lambda) {
  return {w[0] - z[0] + lambda * w[1] * w[2], w[1] - z[1] + lambda * w[0] * w[2], w[2] - z[2] + lambda * w[0] * w[1]};
}

Matrix hessian_f(const Vec4& w, double lambda) {
  Matrix h = Matrix::identity(4);
  const double total = w[0] + w[1] + w[2] + w[3];
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      if (i != j) h(i, j) = lambda * (total - w[i] - w[j]);
    }
  }
  return h;
}

Matrix hessian_g(const Vec3& w, double lambda) {
  Matrix h = Matrix::identity(3);
  const double total = w[0] + w[1] + w[2];
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i != j) h(i, j) = lambda * (total - w[i] - w[j]);
    }
  }
  return h;
}

LambdaThresholds lambda_thresholds(const SortedCell& z, const std::optional<Vec3>& w123) {
  const double z12 = z[0] * z[1];
  if (z12 == 0.0) throw std::invalid_argument("lambda thresholds need z1 z2 > 0");
  LambdaThresholds out;
  out.two_sparse = z[2] / z12;
  if (w123) {
    const auto& w = *w123;
    const double denom = w[0] * w[1] + w[1] * w[2] + w[0] * w[2];
    if (denom == 0.0) throw std::invalid_argument("3-sparse threshold needs a nonzero pair product");
    out.three_sparse = z[3] / denom;
  }
  return out;
}

KktReport kkt_check(const Vec4& w, const SortedCell& z, double lambda, double tol) {
  KktReport r;
  r.dual = gradient_f(w, z.z(), lambda);
  r.primal_feasible = std::all_of(w.begin(), w.end(), [](double v) { return v >= 0.0; });
  r.dual_feasible = std::all_of(r.dual.begin(), r.dual.end(), [&](double v) { return v >= -tol; });
  r.complementary_slack = true;
  for (std::size_t i = 0; i < 4; ++i) {
    if (std::abs(r.dual[i] * w[i]) > tol) r.complementary_slack = false;
    // Projected-gradient residual: zero exactly at KKT points of min_{w>=0} f.
    r.stationarity_residual = std::max(r.stationarity_residual, std::abs(w[i] - std::max(w[i] - r.dual[i], 0.0)));
  }
  r.pass = r.primal_feasible && r.dual_feasible && r.complementary_slack && r.stationarity_residual <= tol;
  return r;
}

const char* simple_reg_name(SimpleReg r) {
  switch (r) {
    case SimpleReg::r0:
      return "l0";
    case SimpleReg::r1:
      return "l1";
    case SimpleReg::r2:
      return "l2";
  }
  return "unknown";
}

Vec4 prox_simple(const SortedCell& z, double lambda, SimpleReg kind) {
  Vec4 w = z.z();
  for (std::size_t i = 2; i < 4; ++i) {
    switch (kind) {
      case SimpleReg::r0:
        w[i] = lambda > 0.5 * z[i] * z[i] ? 0.0 : z[i];
        break;
      case SimpleReg::r1:
        w[i] = std::max(z[i] - lambda, 0.0);
        break;
      case SimpleReg::r2:
        w[i] = z[i] / (1.0 + lambda);
        break;
    }
  }
  return w;
}

}  // namespace prune24::cell
