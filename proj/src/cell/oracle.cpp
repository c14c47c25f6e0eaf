// Brute-force reference for the sorted 2:4 prox. Deliberately self-contained:
// its own objective, its own gradient, no use of the case solvers.

#include <algorithm>
#include <cmath>

#include "prune24/cell.hpp"

namespace prune24::cell {
namespace {

constexpr int kGridSteps = 100;
constexpr int kRefineSteps = 10000;
constexpr double kRefineStep = 1.0 / 8.0;

double f(const Vec4& w, const Vec4& z, double lambda) {
  double q = 0.0;
  for (int i = 0; i < 4; ++i) q += 0.5 * (w[i] - z[i]) * (w[i] - z[i]);
  double r = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      for (int c = b + 1; c < 4; ++c) r += w[a] * w[b] * w[c];
  return q + lambda * r;
}

Vec4 grad(const Vec4& w, const Vec4& z, double lambda) {
  Vec4 g{};
  for (int i = 0; i < 4; ++i) {
    double pairs = 0.0;
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b)
        if (a != i && b != i) pairs += w[a] * w[b];
    g[i] = w[i] - z[i] + lambda * pairs;
  }
  return g;
}

}  // namespace

OracleResult brute_force_prox_oracle(const SortedCell& cell, double lambda) {
  const Vec4& z = cell.z();
  if (z[0] == 0.0) return {{0.0, 0.0, 0.0, 0.0}, 0.0};

  // Minimizers are sorted descending and nonnegative, so the grid only needs
  // the ordered tuples i1 >= i2 >= i3 >= i4 of the uniform grid on [0, z1].
  const double h = z[0] / kGridSteps;
  Vec4 best{z[0], z[1], 0.0, 0.0};
  double best_f = f(best, z, lambda);
  for (int i1 = 0; i1 <= kGridSteps; ++i1) {
    const double w1 = i1 * h;
    const double q1 = 0.5 * (w1 - z[0]) * (w1 - z[0]);
    for (int i2 = 0; i2 <= i1; ++i2) {
      const double w2 = i2 * h;
      const double q2 = q1 + 0.5 * (w2 - z[1]) * (w2 - z[1]);
      const double p12 = w1 * w2;
      for (int i3 = 0; i3 <= i2; ++i3) {
        const double w3 = i3 * h;
        const double q3 = q2 + 0.5 * (w3 - z[2]) * (w3 - z[2]) + lambda * p12 * w3;
        const double e2 = p12 + w1 * w3 + w2 * w3;
        for (int i4 = 0; i4 <= i3; ++i4) {
          const double w4 = i4 * h;
          const double v = q3 + 0.5 * (w4 - z[3]) * (w4 - z[3]) + lambda * e2 * w4;
          if (v < best_f) {
            best_f = v;
            best = {w1, w2, w3, w4};
          }
        }
      }
    }
  }

  // Monotone projected-gradient refinement; halve the step whenever it would
  // increase the objective.
  Vec4 w = best;
  double fw = best_f;
  double step = kRefineStep;
  for (int it = 0; it < kRefineSteps && step > 1e-12; ++it) {
    const Vec4 g = grad(w, z, lambda);
    Vec4 next{};
    for (int i = 0; i < 4; ++i) next[i] = std::max(w[i] - step * g[i], 0.0);
    const double fn = f(next, z, lambda);
    if (fn <= fw) {
      w = next;
      fw = fn;
    } else {
      step *= 0.5;
    }
  }
  return {w, fw};
}

}  // namespace prune24::cell
