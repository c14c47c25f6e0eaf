// prune24: 2:4 pruning command line. Every table goes out as CSV with a header.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

#include "prune24/baselines.hpp"
#include "prune24/harness.hpp"
#include "prune24/linalg.hpp"

using namespace prune24;

namespace {

struct PruneArgs {
  std::string method;
  std::string weights, hessian, out, mask_out;
  int gd_steps = 1000;
  double lambda0 = 0.01;
  double beta = 1.01;
  std::optional<double> adaptive;
  int max_iter = 5000;
  std::uint64_t seed = 0;  // accepted for interface stability; every method is deterministic
  int threads = 1;
};

struct PathArgs {
  std::string z, out;
  double lambda_min = 0.0, lambda_max = 1.0;
  int points = 101;
};

struct SynthArgs {
  std::size_t d = 128;
  double alpha = 0.5;
  std::uint64_t seed = 0;
  std::string out_weights, out_hessian;
};

struct BenchArgs {
  std::string alphas = "1.0,0.9,0.7,0.5,0.3";
  std::size_t d = 128;
  int seeds = 5;
  std::string methods = "all";
  std::string out;
  int gd_steps = 1000;
  int max_iter = 5000;
  int threads = 0;
  bool no_timing = false;
};

struct EvalArgs {
  std::string weights, ref_weights, hessian;
};

// "-" writes to stdout.
template <typename Fn>
void with_output(const std::string& path, Fn&& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return;
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  fn(os);
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

Matrix mask_matrix(const PruneMask& m) {
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(r, c);
  return out;
}

MethodOptions method_options(int gd_steps, int max_iter, double lambda0, double beta, std::optional<double> adaptive,
                             int threads) {
  MethodOptions opt;
  opt.cfg.gd_steps = gd_steps;
  opt.cfg.max_iter = max_iter;
  opt.cfg.threads = threads;
  opt.schedule.lambda0 = lambda0;
  opt.schedule.beta = beta;
  if (adaptive) {
    opt.schedule.adaptive = true;
    opt.schedule.lambda0_tilde = *adaptive;
  }
  return opt;
}

int run_prune(const PruneArgs& a) {
  const Method m = parse_method(a.method);
  const Matrix w_star = read_matrix(a.weights);
  const Hessian h(read_matrix(a.hessian));
  const MethodResult r =
      run_method(m, w_star, h, method_options(a.gd_steps, a.max_iter, a.lambda0, a.beta, a.adaptive, a.threads));
  write_matrix(a.out, r.w);
  write_matrix(a.mask_out, mask_matrix(r.mask));
  const bool iterative = m == Method::prox || m == Method::l0 || m == Method::l1 || m == Method::l2;
  std::cout << "method,loss,iterations,terminated_by,final_lambda,ipm_fallbacks\n"
            << method_name(m) << ',' << std::setprecision(17) << r.loss << ',' << r.iterations << ','
            << (iterative ? termination_name(r.report.terminated_by) : "none") << ',' << r.report.final_lambda << ','
            << r.report.ipm_fallbacks << '\n';
  return 0;
}

int run_prox_path(const PathArgs& a) {
  const auto z = parse_doubles(a.z);
  if (z.size() != 4) throw std::invalid_argument("--z needs exactly 4 values");
  const RegPath path = reg_path_sweep({z[0], z[1], z[2], z[3]}, linear_grid(a.lambda_min, a.lambda_max, a.points));
  with_output(a.out, [&](std::ostream& os) { write_reg_path_csv(os, path); });
  return 0;
}

int run_synth(const SynthArgs& a) {
  const Problem p = gen_synthetic({a.d, a.alpha, a.seed});
  write_matrix(a.out_weights, p.w_star);
  write_matrix(a.out_hessian, p.h.matrix());
  return 0;
}

int run_bench(const BenchArgs& a) {
  BenchSpec spec;
  spec.alphas = parse_doubles(a.alphas);
  spec.d = a.d;
  if (a.seeds < 0) throw std::invalid_argument("--seeds must be >= 0");
  for (int s = 0; s < a.seeds; ++s) spec.seeds.push_back(static_cast<std::uint64_t>(s));
  spec.methods = parse_method_list(a.methods);
  spec.options = method_options(a.gd_steps, a.max_iter, 0.01, 1.01, std::nullopt, 1);
  spec.threads = a.threads;
  const auto rows = run_benchmark(spec);
  with_output(a.out, [&](std::ostream& os) { write_bench_csv(os, rows, !a.no_timing); });
  return 0;
}

int run_toy(const std::string& methods) {
  const Problem p = toy_problem();
  std::cout << "method,loss,w,mask\n";
  for (Method m : parse_method_list(methods)) {
    const MethodResult r = run_method(m, p.w_star, p.h);
    std::cout << method_name(m) << ',' << std::setprecision(17) << r.loss << ",\"";
    for (std::size_t c = 0; c < r.w.cols(); ++c) std::cout << (c ? " " : "") << std::setprecision(10) << r.w(0, c);
    std::cout << "\",";
    for (std::size_t c = 0; c < r.mask.cols(); ++c) std::cout << int(r.mask(0, c));
    std::cout << '\n';
  }
  return 0;
}

int run_eval(const EvalArgs& a) {
  const Matrix w = read_matrix(a.weights);
  const Matrix ref = read_matrix(a.ref_weights);
  const Hessian h(read_matrix(a.hessian));
  std::cout << "loss\n" << std::setprecision(17) << layer_loss(w, ref, h) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2:4 structured-sparsity pruning via the r_{2:4} proximal operator"};
  app.require_subcommand(1);

  PruneArgs pa;
  auto* prune = app.add_subcommand("prune", "prune a weight matrix against a Hessian");
  prune->add_option("--method", pa.method, "prox|wanda|wanda-gd|sparsegpt|sparsegpt-gd|l0|l1|l2")->required();
  prune->add_option("--weights", pa.weights, "dense weights W*")->required();
  prune->add_option("--hessian", pa.hessian, "Hessian H")->required();
  prune->add_option("--out", pa.out, "pruned weights")->required();
  prune->add_option("--mask-out", pa.mask_out, "0/1 keep mask")->required();
  prune->add_option("--gd-steps", pa.gd_steps, "masked GD steps")->capture_default_str();
  prune->add_option("--lambda0", pa.lambda0)->capture_default_str();
  prune->add_option("--beta", pa.beta)->capture_default_str();
  prune->add_option("--adaptive-lambda", pa.adaptive, "lambda0 = value / mean|W*|");
  prune->add_option("--max-iter", pa.max_iter)->capture_default_str();
  prune->add_option("--seed", pa.seed)->capture_default_str();
  prune->add_option("--threads", pa.threads, "threads for the per-cell prox")->capture_default_str();

  PathArgs pp;
  auto* path = app.add_subcommand("prox-path", "regularization path of one cell");
  path->add_option("--z", pp.z, "a,b,c,d")->required();
  path->add_option("--lambda-min", pp.lambda_min)->required();
  path->add_option("--lambda-max", pp.lambda_max)->required();
  path->add_option("--points", pp.points)->required();
  path->add_option("--out", pp.out, "CSV path, - for stdout")->required();

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "synthetic weights and correlated Hessian");
  synth->add_option("--d", sa.d)->required();
  synth->add_option("--alpha", sa.alpha)->required();
  synth->add_option("--seed", sa.seed)->required();
  synth->add_option("--out-weights", sa.out_weights)->required();
  synth->add_option("--out-hessian", sa.out_hessian)->required();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "loss of every method on synthetic problems");
  bench->add_option("--alphas", ba.alphas)->capture_default_str();
  bench->add_option("--d", ba.d)->capture_default_str();
  bench->add_option("--seeds", ba.seeds, "seeds 0..n-1")->capture_default_str();
  bench->add_option("--methods", ba.methods, "comma list or all")->capture_default_str();
  bench->add_option("--out", ba.out, "CSV path, - for stdout")->required();
  bench->add_option("--gd-steps", ba.gd_steps)->capture_default_str();
  bench->add_option("--max-iter", ba.max_iter)->capture_default_str();
  bench->add_option("--threads", ba.threads, "0 = all cores")->capture_default_str();
  bench->add_flag("--no-timing", ba.no_timing, "write 0 in runtime_s");

  std::string toy_methods = "all";
  auto* toy = app.add_subcommand("toy", "the 8-weight toy problem");
  toy->add_option("--method", toy_methods, "comma list or all")->capture_default_str();

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval-loss", "Tr((W - W*) H (W - W*)^T)");
  eval->add_option("--weights", ea.weights)->required();
  eval->add_option("--ref-weights", ea.ref_weights)->required();
  eval->add_option("--hessian", ea.hessian)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.get_exit_code() ? e.get_exit_code() : 2;
  }

  try {
    if (*prune) return run_prune(pa);
    if (*path) return run_prox_path(pp);
    if (*synth) return run_synth(sa);
    if (*bench) return run_bench(ba);
    if (*toy) return run_toy(toy_methods);
    if (*eval) return run_eval(ea);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
