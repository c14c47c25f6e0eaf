#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "prune24/baselines.hpp"
#include "prune24/harness.hpp"
#include "prune24/linalg.hpp"

using namespace prune24;

namespace {

std::string mask_string(const PruneMask& m) {
  std::string s;
  for (auto v : m.values()) s += v ? '1' : '0';
  return s;
}

Matrix random_weights(std::mt19937_64& g, std::size_t r, std::size_t c) {
  std::normal_distribution<double> n;
  Matrix m(r, c);
  for (auto& v : m.data()) v = n(g);
  return m;
}

Hessian random_diagonal(std::mt19937_64& g, std::size_t d) {
  std::uniform_real_distribution<double> u(0.05, 3.0);
  Matrix h(d, d);
  for (std::size_t i = 0; i < d; ++i) h(i, i) = u(g);
  return Hessian(h);
}

// OBS pruning written out with explicit inverses of the trailing Hessian
// block instead of Cholesky rows.
Matrix obs_reference(const Matrix& w_star, const Hessian& h) {
  const Eigen::Index n = static_cast<Eigen::Index>(h.dim());
  Eigen::VectorXd s(n);
  for (Eigen::Index j = 0; j < n; ++j) s(j) = std::sqrt(std::max(h(j, j), 1e-8));
  Eigen::MatrixXd ht(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) ht(i, j) = h(i, j) / (s(i) * s(j));
  const double damp = 0.01 * ht.diagonal().mean();
  ht.diagonal().array() += damp;

  std::vector<Eigen::MatrixXd> tail_inv(n);
  for (Eigen::Index q = 0; q < n; ++q) tail_inv[q] = ht.bottomRightCorner(n - q, n - q).inverse();

  Matrix out(w_star.rows(), w_star.cols());
  for (std::size_t r = 0; r < w_star.rows(); ++r) {
    Eigen::VectorXd w(n);
    for (Eigen::Index j = 0; j < n; ++j) w(j) = w_star(r, j) * s(j);
    for (Eigen::Index c = 0; c < n; c += 4) {
      std::array<Eigen::Index, 4> idx{c, c + 1, c + 2, c + 3};
      std::array<double, 4> score{};
      for (int j = 0; j < 4; ++j) score[j] = w(c + j) * w(c + j) / tail_inv[c + j](0, 0);
      std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return score[a - c] < score[b - c]; });
      std::array<Eigen::Index, 2> pruned{std::min(idx[0], idx[1]), std::max(idx[0], idx[1])};
      for (Eigen::Index q : pruned) {
        const Eigen::MatrixXd& hi = tail_inv[q];
        w.tail(n - q) -= (w(q) / hi(0, 0)) * hi.row(0).transpose();
        w(q) = 0.0;
      }
    }
    for (Eigen::Index j = 0; j < n; ++j) out(r, j) = w(j) / s(j);
  }
  return out;
}

}  // namespace

TEST_CASE("WandA") {
  const Problem toy = toy_problem();
  const MaskedWeights wa = wanda_prune(toy.w_star, toy.h);
  CHECK(wa.w == Matrix(1, 8, {0, 5, 3, 0, 0, 5, 5, 0}));
  CHECK(layer_loss(wa.w, toy.w_star, toy.h) == doctest::Approx(16.0).epsilon(1e-12));

  const Matrix w(1, 8, {-3, 1, 2, -0.5, 1, 1, 1, 1});
  const MaskedWeights mag = wanda_prune(w, Hessian(Matrix::identity(8)));
  CHECK(mask_string(mag.mask) == "10100011");  // ties drop the lowest columns first
  CHECK(mag.w(0, 0) == -3.0);

  const Matrix s = wanda_scores(Matrix(1, 4, {-2, 1, 1, 1}), Hessian(Matrix(4, 4, {4, 0, 0, 0, 0, 9, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0})));
  CHECK(s == Matrix(1, 4, {4, 3, 1, 0}));
  CHECK_THROWS_AS(wanda_prune(Matrix(1, 6), Hessian(Matrix::identity(6))), std::invalid_argument);
}

TEST_CASE("WandA is optimal for diagonal Hessians") {
  std::mt19937_64 g(100);
  for (int t = 0; t < 20; ++t) {
    const Matrix w = random_weights(g, 1, 8);
    const Hessian h = random_diagonal(g, 8);
    const MaskSearchResult best = brute_force_mask_search(w, h);
    const MaskedWeights wa = wanda_prune(w, h);
    CHECK(std::abs(layer_loss(wa.w, w, h) - best.loss) <= 1e-9);
    CHECK(wa.mask == best.mask);
  }
}

TEST_CASE("SparseGPT reconstruction") {
  SUBCASE("toy: the correlated weight is absorbed then dropped") {
    const Problem toy = toy_problem();
    const MaskedWeights sg = sparsegpt_prune(toy.w_star, toy.h);
    CHECK(mask_string(sg.mask) == "01100110");
    CHECK(layer_loss(sg.w, toy.w_star, toy.h) == doctest::Approx(16.0).epsilon(1e-6));
  }
  SUBCASE("identity Hessian equals WandA") {
    std::mt19937_64 g(3);
    const Matrix w = random_weights(g, 3, 16);
    const Hessian h(Matrix::identity(16));
    const MaskedWeights a = sparsegpt_prune(w, h), b = wanda_prune(w, h);
    CHECK(a.mask == b.mask);
    CHECK(a.w == b.w);
  }
  SUBCASE("diagonal Hessian equals WandA") {
    std::mt19937_64 g(4);
    for (int t = 0; t < 20; ++t) {
      const Matrix w = random_weights(g, 2, 8);
      const Hessian h = random_diagonal(g, 8);
      const MaskedWeights a = sparsegpt_prune(w, h), b = wanda_prune(w, h);
      CHECK(a.mask == b.mask);
      for (std::size_t i = 0; i < a.w.size(); ++i)
        CHECK(std::abs(a.w.data()[i] - b.w.data()[i]) <= 1e-12 * (1 + std::abs(b.w.data()[i])));
    }
  }
  SUBCASE("matches the explicit-inverse reference on correlated Hessians") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Problem s = gen_synthetic({16, 0.3, seed});
      std::mt19937_64 g(seed);
      const Matrix w = random_weights(g, 3, 16);
      const MaskedWeights a = sparsegpt_prune(w, s.h);
      const Matrix ref = obs_reference(w, s.h);
      CHECK(a.mask == mask_of(ref));
      for (std::size_t i = 0; i < ref.size(); ++i)
        CHECK(std::abs(a.w.data()[i] - ref.data()[i]) <= 1e-9 * (1 + std::abs(ref.data()[i])));
      CHECK(is_24_sparse(a.w));
    }
  }
  CHECK_THROWS_AS(sparsegpt_prune(Matrix(1, 4, {1, 2, 3, 4}), Hessian(Matrix::identity(4)), -1.0), std::domain_error);
}

TEST_CASE("simple regularizers") {
  const Problem toy = toy_problem();
  SUBCASE("R1 yields exact 2:4") {
    const PruneOutput out = simple_reg_prune(toy.w_star, toy.h, cell::SimpleReg::r1);
    CHECK(out.report.terminated_by == Termination::sparsity_reached);
    CHECK(is_24_sparse(out.w));
    CHECK(layer_loss(out.w, toy.w_star, toy.h) >= 9.0 - 1e-9);
  }
  SUBCASE("R0 above every threshold stops after one prox") {
    LambdaSchedule s;
    s.lambda0 = 100.0;
    const PruneOutput out = simple_reg_prune(toy.w_star, toy.h, cell::SimpleReg::r0, s);
    CHECK(out.report.iterations == 1);
    CHECK(is_24_sparse(out.w));
  }
  SUBCASE("R2 always runs to the cap") {
    PruneConfig cfg;
    cfg.max_iter = 50;
    const PruneOutput out = simple_reg_prune(toy.w_star, toy.h, cell::SimpleReg::r2, {}, cfg);
    CHECK(out.report.terminated_by == Termination::max_iter);
    CHECK(out.report.iterations == 50);
    CHECK(is_24_sparse(out.w));
  }
}

TEST_CASE("exhaustive mask search") {
  const Problem toy = toy_problem();
  const MaskSearchResult best = brute_force_mask_search(toy.w_star, toy.h);
  CHECK(best.loss == doctest::Approx(9.0).epsilon(1e-12));
  CHECK(mask_string(best.mask) == "01010110");
  CHECK(layer_loss(best.w, toy.w_star, toy.h) == doctest::Approx(best.loss).epsilon(1e-12));

  const Matrix sparse(1, 8, {0, 1, 0, 2, 3, 0, 0, 4});
  const Problem s = gen_synthetic({8, 0.5, 1});
  CHECK(brute_force_mask_search(sparse, s.h).loss <= 1e-18);
  CHECK_THROWS_AS(brute_force_mask_search(Matrix(1, 36), Hessian(Matrix::identity(36))), std::invalid_argument);

  // never worse than any heuristic on small correlated problems
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Problem p = gen_synthetic({12, 0.2, seed});
    const double opt = brute_force_mask_search(p.w_star, p.h).loss;
    CHECK(opt <= layer_loss(wanda_prune(p.w_star, p.h).w, p.w_star, p.h) + 1e-12);
    CHECK(opt <= layer_loss(prune_prox(p.w_star, p.h).w, p.w_star, p.h) + 1e-9);
  }
}

TEST_CASE("masked GD never hurts the one-shot baselines") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Problem p = gen_synthetic({32, 0.4, seed});
    for (bool gpt : {false, true}) {
      const MaskedWeights m = gpt ? sparsegpt_prune(p.w_star, p.h) : wanda_prune(p.w_star, p.h);
      const Matrix after = masked_gd_preconditioned(m.w, p.w_star, p.h, m.mask, 300);
      CHECK(layer_loss(after, p.w_star, p.h) <= layer_loss(m.w, p.w_star, p.h) * (1 + 1e-12));
    }
  }
}
