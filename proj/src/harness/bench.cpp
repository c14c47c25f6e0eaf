#include <algorithm>
#include <chrono>
#include <exception>
#include <iomanip>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>

#include "../parallel.hpp"
#include "prune24/baselines.hpp"
#include "prune24/harness.hpp"
#include "prune24/linalg.hpp"

namespace prune24 {

const char* method_name(Method m) {
  switch (m) {
    case Method::prox:
      return "prox";
    case Method::wanda:
      return "wanda";
    case Method::wanda_gd:
      return "wanda+gd";
    case Method::sparsegpt:
      return "sparsegpt";
    case Method::sparsegpt_gd:
      return "sparsegpt+gd";
    case Method::l0:
      return "l0";
    case Method::l1:
      return "l1";
    case Method::l2:
      return "l2";
  }
  return "?";
}

std::vector<Method> all_methods() {
  return {Method::prox, Method::wanda, Method::wanda_gd, Method::sparsegpt,
          Method::sparsegpt_gd, Method::l0, Method::l1, Method::l2};
}

Method parse_method(std::string_view s) {
  std::string name(s);
  if (auto p = name.find("-gd"); p != std::string::npos && p + 3 == name.size()) name[p] = '+';
  for (Method m : all_methods())
    if (name == method_name(m)) return m;
  throw std::invalid_argument("unknown method '" + std::string(s) + "'");
}

std::vector<Method> parse_method_list(std::string_view s) {
  if (s == "all") return all_methods();
  std::vector<Method> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = std::min(s.find(',', start), s.size());
    const std::string_view item = s.substr(start, end - start);
    if (!item.empty()) out.push_back(parse_method(item));
    start = end + 1;
  }
  if (out.empty()) throw std::invalid_argument("empty method list");
  return out;
}

MethodResult run_method(Method m, const Matrix& w_star, const Hessian& h, const MethodOptions& opt) {
  MethodResult res;
  auto from_prune = [&](PruneOutput out) {
    res.w = std::move(out.w);
    res.mask = std::move(out.mask);
    res.iterations = out.report.iterations;
    res.report = std::move(out.report);
  };
  auto from_masked = [&](MaskedWeights mw, bool gd) {
    res.mask = std::move(mw.mask);
    res.w = gd ? masked_gd_preconditioned(mw.w, w_star, h, res.mask, opt.cfg.gd_steps) : std::move(mw.w);
    res.iterations = gd ? opt.cfg.gd_steps : 0;
  };
  switch (m) {
    case Method::prox:
      from_prune(prune_prox(w_star, h, opt.schedule, opt.cfg));
      break;
    case Method::wanda:
    case Method::wanda_gd:
      from_masked(wanda_prune(w_star, h), m == Method::wanda_gd);
      break;
    case Method::sparsegpt:
    case Method::sparsegpt_gd:
      from_masked(sparsegpt_prune(w_star, h), m == Method::sparsegpt_gd);
      break;
    case Method::l0:
      from_prune(simple_reg_prune(w_star, h, cell::SimpleReg::r0, opt.schedule, opt.cfg));
      break;
    case Method::l1:
      from_prune(simple_reg_prune(w_star, h, cell::SimpleReg::r1, opt.schedule, opt.cfg));
      break;
    case Method::l2:
      from_prune(simple_reg_prune(w_star, h, cell::SimpleReg::r2, opt.schedule, opt.cfg));
      break;
  }
  res.loss = layer_loss(res.w, w_star, h);
  return res;
}

std::vector<BenchRow> run_benchmark(const BenchSpec& spec) {
  if (spec.methods.empty()) throw std::invalid_argument("no methods given");
  struct Job {
    double alpha;
    std::uint64_t seed;
    Method method;
  };
  std::vector<Job> jobs;
  for (double a : spec.alphas)
    for (std::uint64_t s : spec.seeds)
      for (Method m : spec.methods) jobs.push_back({a, s, m});
  std::stable_sort(jobs.begin(), jobs.end(), [](const Job& x, const Job& y) {
    return std::make_tuple(x.alpha, x.seed, std::string_view(method_name(x.method))) <
           std::make_tuple(y.alpha, y.seed, std::string_view(method_name(y.method)));
  });

  MethodOptions opt = spec.options;
  opt.cfg.threads = 1;
  const int threads =
      spec.threads > 0 ? spec.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  std::vector<BenchRow> rows(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  detail::parallel_for(jobs.size(), threads, [&](std::size_t i) {
    try {
      const Job& j = jobs[i];
      const Problem p = gen_synthetic({spec.d, j.alpha, j.seed});
      const auto t0 = std::chrono::steady_clock::now();
      const MethodResult r = run_method(j.method, p.w_star, p.h, opt);
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      rows[i] = {j.alpha, j.seed, j.method, r.loss, dt.count(), r.iterations};
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rows;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRow>& rows, bool timing) {
  os << "alpha,seed,method,loss,runtime_s,iterations\n";
  for (const auto& r : rows) {
    os << std::setprecision(17) << r.alpha << ',' << r.seed << ',' << method_name(r.method) << ',' << r.loss << ','
       << std::setprecision(6) << (timing ? r.runtime_s : 0.0) << ',' << r.iterations << '\n';
  }
}

}  // namespace prune24
