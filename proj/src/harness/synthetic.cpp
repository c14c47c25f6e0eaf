#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "prune24/harness.hpp"

namespace prune24 {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

Problem toy_problem() {
  Matrix w(1, 8, {0, 5, 3, 2, 0, 5, 5, 2});
  Matrix h = Matrix::identity(8);
  h(3, 7) = 1.0;
  h(7, 3) = 1.0;
  return {std::move(w), Hessian(std::move(h))};
}

Problem gen_synthetic(const SyntheticSpec& spec) {
  const std::size_t d = spec.d;
  if (d < 4 || d % 4 != 0) throw std::invalid_argument("d must be a positive multiple of 4, got " + std::to_string(d));
  if (!(spec.alpha >= 0.0 && spec.alpha <= 1.0)) throw std::invalid_argument("alpha must lie in [0, 1]");

  Rng rng(spec.seed);
  std::vector<double> diag(d);
  for (auto& v : diag) v = rng.uniform();
  Matrix g(d, d);
  for (auto& v : g.data()) v = rng.normal();
  Matrix w(1, d);
  for (auto& v : w.data()) v = rng.normal();

  const double a = spec.alpha;
  const double inv_d = 1.0 / static_cast<double>(d);
  Matrix h(d, d);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i; j < d; ++j) {
      double z = 0.0;
      const auto gi = g.row(i);
      const auto gj = g.row(j);
      for (std::size_t k = 0; k < d; ++k) z += gi[k] * gj[k];
      double v = (1.0 - a) * z * inv_d;
      if (i == j) v += a * diag[i];
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return {std::move(w), Hessian(std::move(h))};
}

}  // namespace prune24
