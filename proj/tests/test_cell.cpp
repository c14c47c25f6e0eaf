#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "prune24/cell.hpp"
#include "prune24/linalg.hpp"

using namespace prune24;
using namespace prune24::cell;

namespace {

const Vec4 kEasy{1.6, 1.1, 0.8, 0.5};
const Vec4 kTied234{1.6, 1.11, 1.1, 1.09};

SortedCell random_cell(std::mt19937_64& g, double hi = 2.0) {
  std::uniform_real_distribution<double> u(0.0, hi);
  Vec4 z{u(g), u(g), u(g), u(g)};
  std::sort(z.begin(), z.end(), std::greater<>());
  return SortedCell(z);
}

double max_abs_diff(const Vec4& a, const Vec4& b) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double eigen_max(const Matrix& m) {
  Eigen::Matrix4d e;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) e(i, j) = m(i, j);
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(e).eigenvalues().maxCoeff();
}

}  // namespace

TEST_CASE("SortedCell validation") {
  CHECK_NOTHROW(SortedCell({3, 2, 2, 0}));
  CHECK_THROWS_AS(SortedCell({1, 2, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(SortedCell({1, 0, 0, -1}), std::invalid_argument);
  CHECK_THROWS_AS(SortedCell({INFINITY, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("pos_sort and inv_pos_sort") {
  const auto [s, sp] = pos_sort({-1.6, 0.5, -0.8, 1.1});
  CHECK(s.z() == Vec4{1.6, 1.1, 0.8, 0.5});
  CHECK(sp.perm == std::array<std::uint8_t, 4>{0, 3, 2, 1});
  CHECK(sp.signs == std::array<std::int8_t, 4>{-1, 1, -1, 1});
  CHECK(inv_pos_sort(s.z(), sp) == Vec4{-1.6, 0.5, -0.8, 1.1});

  // stable on ties
  const auto [t, tp] = pos_sort({1, -1, 1, 0});
  CHECK(tp.perm == std::array<std::uint8_t, 4>{0, 1, 2, 3});
  CHECK(t.z() == Vec4{1, 1, 1, 0});

  // pruned slots come back as +0
  const Vec4 back = inv_pos_sort({1.6, 0, 0, 0}, sp);
  CHECK_FALSE(std::signbit(back[2]));
}

TEST_CASE("regularizer r_{N:M}") {
  const double ones[4] = {1, 1, 1, 1};
  CHECK(regularizer_rNM(ones, 2) == 4.0);
  CHECK(regularizer_rNM(ones, 1) == 6.0);
  CHECK(regularizer_rNM(ones, 3) == 1.0);
  const double v[4] = {2, -3, 0.5, 0};
  CHECK(regularizer_rNM(v, 2) == doctest::Approx(3.0));
  CHECK_THROWS_AS(regularizer_rNM(v, 4), std::invalid_argument);
  CHECK_THROWS_AS(regularizer_rNM(v, 0), std::invalid_argument);

  // vanishes exactly on N-sparse vectors, positive otherwise
  std::mt19937_64 g(1);
  std::normal_distribution<double> n;
  std::bernoulli_distribution zero(0.4);
  for (int t = 0; t < 500; ++t) {
    double w[8];
    int nnz = 0;
    for (double& x : w) {
      x = zero(g) ? 0.0 : n(g);
      nnz += x != 0.0;
    }
    for (int N : {1, 2, 3}) {
      const double r4a = regularizer_rNM(std::span<const double>(w, 4), N);
      int nnz4 = 0;
      for (int i = 0; i < 4; ++i) nnz4 += w[i] != 0.0;
      CHECK((r4a == 0.0) == (nnz4 <= N));
      CHECK(r4a >= 0.0);
    }
    CHECK((regularizer_rNM(w, 4) == 0.0) == (nnz <= 4));
  }
  // matches objective_f's cubic term for nonnegative w
  const Vec4 w{0.3, 1.2, 0.7, 2.0};
  CHECK(objective_f(w, w, 1.0) == doctest::Approx(regularizer_rNM(w, 2)).epsilon(1e-15));
}

TEST_CASE("gradients and Hessians match finite differences") {
  std::mt19937_64 g(2);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int t = 0; t < 20; ++t) {
    const Vec4 z{u(g), u(g), u(g), u(g)};
    const Vec4 w{u(g), u(g), u(g), u(g)};
    const double lambda = u(g);
    const Vec4 gr = gradient_f(w, z, lambda);
    const Matrix h = hessian_f(w, lambda);
    const double e = 1e-6;
    for (int i = 0; i < 4; ++i) {
      Vec4 up = w, dn = w;
      up[i] += e;
      dn[i] -= e;
      CHECK(gr[i] == doctest::Approx((objective_f(up, z, lambda) - objective_f(dn, z, lambda)) / (2 * e)).epsilon(1e-7));
      const Vec4 gu = gradient_f(up, z, lambda), gd = gradient_f(dn, z, lambda);
      for (int j = 0; j < 4; ++j) CHECK(h(j, i) == doctest::Approx((gu[j] - gd[j]) / (2 * e)).epsilon(1e-6));
    }
    const Vec3 w3{w[0], w[1], w[2]}, z3{z[0], z[1], z[2]};
    const Vec3 g3 = gradient_g(w3, z3, lambda);
    const Matrix h3 = hessian_g(w3, lambda);
    for (int i = 0; i < 3; ++i) {
      CHECK(g3[i] == doctest::Approx(gr[i] - lambda * (i == 0 ? w[1] * w[3] + w[2] * w[3]
                                                        : i == 1 ? w[0] * w[3] + w[2] * w[3]
                                                                 : w[0] * w[3] + w[1] * w[3]))
                         .epsilon(1e-12));
      for (int j = 0; j < 3; ++j)
        if (i != j) CHECK(h3(i, j) == doctest::Approx(lambda * w[3 - i - j]));
    }
  }
}

TEST_CASE("case solvers on symmetric inputs have closed forms") {
  const SortedCell ones({1, 1, 1, 1});
  const double dense = (-1 + std::sqrt(1 + 12 * 0.1)) / (6 * 0.1);
  const double three = (-1 + std::sqrt(1 + 4 * 0.1)) / (2 * 0.1);
  for (Backend b : {Backend::gd, Backend::ipm}) {
    auto solve = [b](const SortedCell& z, double lambda, CaseTag which) {
      return b == Backend::gd ? solve_case_gd(z, lambda, which) : solve_case_ipm(z, lambda, which);
    };
    const CaseOutcome d = solve(ones, 0.1, CaseTag::dense);
    REQUIRE(d);
    for (double v : *d.w) CHECK(v == doctest::Approx(dense).epsilon(1e-9));
    const CaseOutcome t = solve(ones, 0.1, CaseTag::three_sparse);
    REQUIRE(t);
    for (int i = 0; i < 3; ++i) CHECK((*t.w)[i] == doctest::Approx(three).epsilon(1e-9));
    CHECK((*t.w)[3] == 0.0);
  }
  CHECK(dense == doctest::Approx(0.80539950));
  CHECK(three == doctest::Approx(0.91607978));
}

TEST_CASE("case solvers report absent cases") {
  const SortedCell easy(kEasy);
  const CaseOutcome gd = solve_case_gd(easy, 5.0, CaseTag::dense);
  CHECK_FALSE(gd);
  CHECK(gd.aborted);
  CHECK_FALSE(solve_case_ipm(easy, 5.0, CaseTag::dense));
  CHECK_THROWS_AS(solve_case_gd(easy, 1.0, CaseTag::two_sparse), std::invalid_argument);

  const CaseOutcome z = solve_case_ipm(SortedCell({1, 1, 1, 1}), 0.0, CaseTag::dense);
  REQUIRE(z);
  CHECK(max_abs_diff(*z.w, {1, 1, 1, 1}) <= 1e-9);
}

TEST_CASE("GD cap raises CellSolveError with the last iterate") {
  SolverOptions opt;
  opt.max_iter = 3;
  try {
    solve_case_gd(SortedCell(kTied234), 0.05, CaseTag::dense, opt);
    FAIL("expected CellSolveError");
  } catch (const CellSolveError& e) {
    for (double v : e.last_iterate()) CHECK(v > 0.0);
  }
}

TEST_CASE("prox_enumerate reference points") {
  SUBCASE("already 2-sparse input") {
    for (double lambda : {0.0, 0.3, 10.0}) {
      const ProxResult r = prox_enumerate(SortedCell({5, 3, 0, 0}), lambda);
      CHECK(r.w == Vec4{5, 3, 0, 0});
      CHECK(r.case_tag == CaseTag::two_sparse);
      CHECK(r.objective == 0.0);
    }
  }
  SUBCASE("easy input, large lambda") {
    const ProxResult r = prox_enumerate(SortedCell(kEasy), 1.0);
    CHECK(r.w == Vec4{1.6, 1.1, 0, 0});
    CHECK(r.case_tag == CaseTag::two_sparse);
  }
  SUBCASE("lambda = 0 returns z") {
    const ProxResult r = prox_enumerate(SortedCell(kEasy), 0.0);
    CHECK(r.w == kEasy);
    CHECK(r.case_tag == CaseTag::dense);
  }
  // Stationary points from a 30-digit Newton solve of grad f = 0.
  SUBCASE("near-tied tail stays dense") {
    const ProxResult r = prox_enumerate(SortedCell(kTied234), 0.05);
    CHECK(r.case_tag == CaseTag::dense);
    CHECK(max_abs_diff(r.w, {1.4725544499218493, 0.9331384341295309, 0.9217857808660661, 0.9104184676390106}) <= 1e-8);
    CHECK(r.objective == doctest::Approx(0.2825916125846084).epsilon(1e-10));
  }
  SUBCASE("easy input, three-sparse range") {
    const ProxResult r = prox_enumerate(SortedCell(kEasy), 0.25);
    CHECK(r.case_tag == CaseTag::three_sparse);
    CHECK(max_abs_diff(r.w, {1.4947740327110306, 0.9310655541105077, 0.45206684674097647, 0}) <= 1e-8);
    CHECK(r.objective == doctest::Approx(0.36262345863877976).epsilon(1e-10));
  }
  SUBCASE("easy input, small lambda") {
    const ProxResult r = prox_enumerate(SortedCell(kEasy), 0.05);
    CHECK(r.case_tag == CaseTag::dense);
    CHECK(max_abs_diff(r.w, {1.537290896558703, 1.0105507515435275, 0.6795519557644314, 0.3357549377097818}) <= 1e-8);
  }
  SUBCASE("zero cell") {
    CHECK(prox_enumerate(SortedCell({0, 0, 0, 0}), 1.0).w == Vec4{0, 0, 0, 0});
  }
  CHECK_THROWS_AS(prox_enumerate(SortedCell(kEasy), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(prox_enumerate(SortedCell(kEasy), NAN), std::invalid_argument);
}

TEST_CASE("prox_full undoes the sign and order reduction") {
  const Vec4 w = prox_full({-1.6, 0.5, -0.8, 1.1}, 1.0);
  CHECK(w == Vec4{-1.6, 0, 0, 1.1});
}

TEST_CASE("lambda thresholds") {
  const LambdaThresholds t = lambda_thresholds(SortedCell(kEasy), Vec3{1.6, 1.1, 0.8});
  CHECK(t.two_sparse == doctest::Approx(0.8 / 1.76).epsilon(1e-15));
  REQUIRE(t.three_sparse);
  CHECK(*t.three_sparse == doctest::Approx(0.5 / (1.76 + 0.88 + 1.28)).epsilon(1e-15));
  CHECK_THROWS_AS(lambda_thresholds(SortedCell({1, 0, 0, 0})), std::invalid_argument);
}

TEST_CASE("KKT check") {
  const SortedCell z(kEasy);
  CHECK(kkt_check(prox_enumerate(z, 1.0).w, z, 1.0).pass);
  CHECK(kkt_check(prox_enumerate(z, 0.25).w, z, 0.25).pass);
  const KktReport bad = kkt_check({1.0, 1.0, 0.0, 0.0}, z, 1.0);
  CHECK_FALSE(bad.pass);
  CHECK(bad.stationarity_residual > 0.1);
  CHECK_FALSE(kkt_check({1.6, 1.1, -0.1, 0}, z, 1.0).primal_feasible);
}

TEST_CASE("closed-form simple proxes") {
  const SortedCell z(kEasy);
  const Vec4 r1 = prox_simple(z, 0.6, SimpleReg::r1);
  CHECK(max_abs_diff(r1, {1.6, 1.1, 0.2, 0}) <= 1e-15);
  CHECK(prox_simple(z, 0.4, SimpleReg::r0) == Vec4{1.6, 1.1, 0, 0});
  CHECK(prox_simple(z, 0.3, SimpleReg::r0) == Vec4{1.6, 1.1, 0.8, 0});
  CHECK(max_abs_diff(prox_simple(z, 1.0, SimpleReg::r2), {1.6, 1.1, 0.4, 0.25}) <= 1e-15);
  CHECK(std::string(simple_reg_name(SimpleReg::r2)) == "l2");
}

TEST_CASE("brute-force oracle") {
  const OracleResult o = brute_force_prox_oracle(SortedCell({5, 3, 0, 0}), 2.0);
  CHECK(o.objective == 0.0);
  const SortedCell ones({1, 1, 1, 1});
  const OracleResult d = brute_force_prox_oracle(ones, 0.1);
  for (double v : d.w) CHECK(v == doctest::Approx(0.80539950).epsilon(1e-6));
}

TEST_CASE("property: prox matches oracle, backends agree, KKT holds") {
  std::mt19937_64 g(31);
  std::uniform_real_distribution<double> loglam(-3.0, 1.0);
  for (int t = 0; t < 150; ++t) {
    const SortedCell z = random_cell(g);
    const double lambda = std::pow(10.0, loglam(g));
    CAPTURE(z.z());
    CAPTURE(lambda);
    const ProxResult a = prox_enumerate(z, lambda, Backend::gd);
    const ProxResult b = prox_enumerate(z, lambda, Backend::ipm);
    const OracleResult o = brute_force_prox_oracle(z, lambda);
    CHECK(a.objective <= o.objective + 1e-6 * std::max(1.0, std::abs(o.objective)));
    CHECK(std::abs(a.objective - o.objective) <= 1e-6 * std::max(1.0, std::abs(o.objective)));
    CHECK(max_abs_diff(a.w, b.w) <= 1e-6);
    CHECK(kkt_check(a.w, z, lambda).pass);
    for (int i = 0; i < 3; ++i) CHECK(a.w[i] >= a.w[i + 1] - 1e-12);
    CHECK(a.w[3] >= 0.0);
  }
}

TEST_CASE("property: 2-sparse output needs lambda >= z3/(z1 z2)") {
  std::mt19937_64 g(7);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int t = 0; t < 500; ++t) {
    const SortedCell z = random_cell(g);
    if (z[0] * z[1] == 0.0) continue;
    const double lambda = u(g);
    const ProxResult r = prox_enumerate(z, lambda);
    if (r.case_tag == CaseTag::two_sparse) CHECK(lambda >= lambda_thresholds(z).two_sparse);
    if (r.case_tag == CaseTag::three_sparse)
      CHECK(lambda >= *lambda_thresholds(z, Vec3{z[0], z[1], z[2]}).three_sparse);
  }
}

TEST_CASE("property: signed permutation equivariance") {
  std::mt19937_64 g(12);
  std::uniform_real_distribution<double> u(-2.0, 2.0), l(0.0, 1.5);
  std::array<int, 4> p{0, 1, 2, 3};
  for (int t = 0; t < 100; ++t) {
    const Vec4 z{u(g), u(g), u(g), u(g)};
    const double lambda = l(g);
    std::shuffle(p.begin(), p.end(), g);
    std::array<double, 4> s{};
    for (double& v : s) v = u(g) < 0 ? -1.0 : 1.0;
    Vec4 pz{};
    for (int i = 0; i < 4; ++i) pz[i] = s[i] * z[p[i]];
    const Vec4 w = prox_full(z, lambda), pw = prox_full(pz, lambda);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(pw[i] - s[i] * w[p[i]]) <= 1e-12);
  }
}

TEST_CASE("property: PSD Hessian of f has spectrum in [0, 4]") {
  std::mt19937_64 g(21);
  std::uniform_real_distribution<double> u(0.0, 2.0), l(0.0, 2.0);
  int psd = 0;
  for (int t = 0; t < 2000; ++t) {
    const Vec4 w{u(g), u(g), u(g), u(g)};
    const Matrix h = hessian_f(w, l(g));
    if (!is_psd(h)) continue;
    ++psd;
    CHECK(eigen_max(h) <= 4.0 + 1e-9);
  }
  CHECK(psd > 100);
}

TEST_CASE("property: GD trajectory stays in the PSD region for dense optima") {
  std::mt19937_64 g(41);
  std::uniform_real_distribution<double> loglam(-3.0, 0.0);
  int dense = 0;
  for (int t = 0; t < 300; ++t) {
    const SortedCell z = random_cell(g);
    const double lambda = std::pow(10.0, loglam(g));
    if (prox_enumerate(z, lambda).case_tag != CaseTag::dense) continue;
    ++dense;
    std::vector<Vec4> traj;
    solve_case_gd(z, lambda, CaseTag::dense, {}, &traj);
    for (const Vec4& w : traj) CHECK(is_psd(hessian_f(w, lambda), 1e-9));
  }
  CHECK(dense > 20);
}
