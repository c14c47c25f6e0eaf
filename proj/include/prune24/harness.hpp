#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "prune24/cell.hpp"
#include "prune24/matrix.hpp"
#include "prune24/pruner.hpp"

namespace prune24 {

struct Problem {
  Matrix w_star;
  Hessian h;
};

/// W* = (0,5,3,2,0,5,5,2), H = I_8 with the 4th and 8th inputs perfectly correlated.
Problem toy_problem();

/// mt19937_64 stream. uniform() = (x >> 11) * 2^-53 in [0, 1); normal() is
/// Box-Muller on two uniforms, the second variate cached for the next call.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct SyntheticSpec {
  std::size_t d = 128;
  double alpha = 0.5;
  std::uint64_t seed = 0;
};

/// H = alpha * diag(u) + (1 - alpha) * G G^T / d, W* ~ N(0, 1) of shape 1 x d.
/// Draw order: d uniforms for u, then G row-major, then the weights.
Problem gen_synthetic(const SyntheticSpec& spec);

// Regularization path -------------------------------------------------------

struct RegPathRow {
  double lambda = 0.0;
  cell::Vec4 w{};
  cell::CaseTag case_tag = cell::CaseTag::dense;
};

struct RegPath {
  cell::Vec4 z{};
  double lambda2_star = 0.0;
  std::vector<RegPathRow> rows;
};

/// `points` values evenly spaced over [lo, hi].
std::vector<double> linear_grid(double lo, double hi, int points);

/// prox of lambda * r_{2:4} at z for every lambda in the (increasing) grid.
RegPath reg_path_sweep(const cell::Vec4& z, const std::vector<double>& lambdas);

/// Smallest grid lambda from which every later row is two_sparse; NaN if none.
double sparsification_lambda(const RegPath& path);

void write_reg_path_csv(std::ostream& os, const RegPath& path);

// Methods and benchmark -----------------------------------------------------

enum class Method { prox, wanda, wanda_gd, sparsegpt, sparsegpt_gd, l0, l1, l2 };

/// "prox", "wanda", "wanda+gd", ...
const char* method_name(Method m);
/// Accepts the names above and "-gd" spellings. Throws std::invalid_argument.
Method parse_method(std::string_view s);
std::vector<Method> all_methods();
/// Comma-separated list or "all".
std::vector<Method> parse_method_list(std::string_view s);

struct MethodOptions {
  LambdaSchedule schedule;
  PruneConfig cfg;
};

struct MethodResult {
  Matrix w;
  PruneMask mask;
  double loss = 0.0;
  /// Proximal iterations, or masked-GD steps for the one-shot methods with "+gd".
  int iterations = 0;
  PruneReport report;
};

MethodResult run_method(Method m, const Matrix& w_star, const Hessian& h, const MethodOptions& opt = {});

struct BenchRow {
  double alpha = 0.0;
  std::uint64_t seed = 0;
  Method method = Method::prox;
  double loss = 0.0;
  double runtime_s = 0.0;
  int iterations = 0;
};

struct BenchSpec {
  std::vector<double> alphas;
  std::size_t d = 128;
  std::vector<std::uint64_t> seeds;
  std::vector<Method> methods;
  MethodOptions options;
  /// Parallel (alpha, seed, method) jobs; 0 means hardware concurrency.
  int threads = 0;
};

/// Rows sorted by (alpha, seed, method name).
std::vector<BenchRow> run_benchmark(const BenchSpec& spec);

/// Header alpha,seed,method,loss,runtime_s,iterations. With `timing` false the
/// runtime column is written as 0 so the file is reproducible.
void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows, bool timing = true);

// Matrix files --------------------------------------------------------------

class MatrixFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary: "PRX1", u32 version 1, u64 rows, u64 cols, rows*cols f64; all
/// little-endian, row-major. Paths ending in .csv use the text format instead:
/// a "rows,cols" line, then one comma-separated line per row.
void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

void write_matrix_csv(std::ostream& os, const Matrix& m);
Matrix read_matrix_csv(std::istream& is);

/// Comma-separated doubles, e.g. "1.6,1.1,0.8".
std::vector<double> parse_doubles(std::string_view s);

}  // namespace prune24
