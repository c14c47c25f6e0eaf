#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "prune24/harness.hpp"

namespace prune24 {

std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 2) throw std::invalid_argument("need at least 2 grid points");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw std::invalid_argument("need finite lo < hi");
  if (lo < 0.0) throw std::invalid_argument("lambda must be >= 0");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  g.back() = hi;
  return g;
}

RegPath reg_path_sweep(const cell::Vec4& z, const std::vector<double>& lambdas) {
  if (lambdas.size() < 2) throw std::invalid_argument("need at least 2 lambdas");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] > lambdas[i - 1])) throw std::invalid_argument("lambda grid must be increasing");

  const auto [sorted, sp] = cell::pos_sort(z);
  RegPath path;
  path.z = z;
  path.lambda2_star = sorted[0] * sorted[1] > 0.0 ? sorted[2] / (sorted[0] * sorted[1]) : 0.0;
  path.rows.reserve(lambdas.size());
  for (double lambda : lambdas) {
    const cell::ProxResult r = cell::prox_enumerate(sorted, lambda);
    path.rows.push_back({lambda, cell::inv_pos_sort(r.w, sp), r.case_tag});
  }
  return path;
}

double sparsification_lambda(const RegPath& path) {
  double first = std::numeric_limits<double>::quiet_NaN();
  for (auto it = path.rows.rbegin(); it != path.rows.rend() && it->case_tag == cell::CaseTag::two_sparse; ++it)
    first = it->lambda;
  return first;
}

void write_reg_path_csv(std::ostream& os, const RegPath& path) {
  os << "lambda,w1,w2,w3,w4,case,lambda2_star\n" << std::setprecision(17);
  for (const auto& row : path.rows) {
    os << row.lambda;
    for (double v : row.w) os << ',' << v;
    os << ',' << cell::case_name(row.case_tag) << ',' << path.lambda2_star << '\n';
  }
}

}  // namespace prune24
