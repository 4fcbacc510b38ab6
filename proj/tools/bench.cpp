#include <fstream>
#include <random>
#include <sstream>

#include "commands.hpp"
#include "desk.hpp"
#include "guard.hpp"
#include "nsp/diagnostics.hpp"
#include "nsp/error.hpp"
#include "nsp/io.hpp"

namespace nsp::cli {
namespace {

Vec gaussian_noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vec v(static_cast<Eigen::Index>(n));
  for (auto& e : v) e = normal(rng);
  return v;
}

// y + noise rescaled to noise_frac * ||y||.
Vec add_noise(const Vec& y, double noise_frac, std::uint64_t seed) {
  if (noise_frac == 0.0) return y;
  const Vec e = gaussian_noise(static_cast<std::size_t>(y.size()), seed);
  return y + (noise_frac * y.norm() / e.norm()) * e;
}

double default_lambda(const BenchOptions& opt, const LinearOp& K, const LinearOp& A, const Vec& y, NormKind kind) {
  if (opt.lambda > 0.0) return opt.lambda;
  return 0.1 * desk::lambda_scale(K, A, y, Penalty(1.0, kind));
}

class CsvWriter {
 public:
  CsvWriter(const Problem& problem, const Reference& ref, double tau, double sigma)
      : problem_(problem), ref_(ref), tau_(tau), sigma_(sigma) {
    out_ << "algorithm,iteration,objective,fp_residual,distance_to_reference,baseline_deviation\n";
  }

  void rows(const std::string& algorithm, const std::vector<Vec>& xs, const std::vector<Vec>& ws,
            const std::vector<double>* deviation) {
    for (std::size_t n = 0; n < xs.size(); ++n) {
      out_ << algorithm << ',' << n << ',' << io::format_real(objective(problem_, xs[n])) << ','
           << io::format_real(fixed_point_residual(problem_, xs[n], ws[n], tau_, sigma_)) << ','
           << io::format_real((xs[n] - ref_.x).norm()) << ',';
      if (deviation) out_ << io::format_real((*deviation)[n]);
      out_ << '\n';
    }
  }

  std::string str() const { return out_.str(); }

 private:
  const Problem& problem_;
  const Reference& ref_;
  double tau_;
  double sigma_;
  std::ostringstream out_;
};

std::vector<double> per_iterate_deviation(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  std::vector<double> d;
  for (std::size_t n = 0; n < a.size(); ++n) d.push_back((a[n] - b[n]).lpNorm<Eigen::Infinity>());
  return d;
}

// Plain solver run with default steps; no baseline applies.
std::string lv_only(const Problem& problem, std::size_t max_iter) {
  const Reference ref = reference_solution(problem);
  SolverConfig config = make_config(problem, max_iter, 0.0);
  std::vector<Vec> xs, ws;
  config.observer = [&](std::size_t, const Vec& x, const Vec& w) {
    xs.push_back(x);
    ws.push_back(w);
  };
  lv_solve(problem, config);
  CsvWriter csv(problem, ref, config.tau, config.sigma);
  csv.rows("lv", xs, ws, nullptr);
  return csv.str();
}

std::string bench_tomography(const BenchOptions& opt) {
  const Shape2D shape{opt.rows ? opt.rows : 16, opt.cols ? opt.cols : 16};
  const TomographyData data =
      make_tv_tomography(shape, piecewise_constant_phantom(shape), opt.rays, opt.noise_frac, opt.seed);
  const double lambda = default_lambda(opt, data.K, data.A, data.y, NormKind::block_euclidean);
  return lv_only(data.with_lambda(lambda), opt.max_iter);
}

std::string bench_group(const BenchOptions& opt) {
  const std::size_t rows = opt.rows ? opt.rows : 20;
  const std::size_t cols = opt.cols ? opt.cols : 30;
  const LinearOp K = desk::scaled_gaussian(rows, cols, 1.0, opt.seed);
  // Groups of four with one shared index between neighbours.
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t start = 0; start + 1 < cols; start += 3) {
    std::vector<std::size_t> g;
    for (std::size_t i = start; i < std::min(start + 4, cols); ++i) g.push_back(i);
    groups.push_back(g);
  }
  Vec truth = Vec::Zero(static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < std::min<std::size_t>(4, cols); ++i) truth[static_cast<Eigen::Index>(i)] = 1.0;
  for (std::size_t i = cols / 2; i < std::min(cols / 2 + 4, cols); ++i) truth[static_cast<Eigen::Index>(i)] = -1.0;
  const Vec y = add_noise(K.apply(truth), opt.noise_frac, opt.seed + 1);
  const LinearOp A = make_group_selector(groups, cols);
  return lv_only(make_group_sparsity(K, y, groups, default_lambda(opt, K, A, y, NormKind::block_euclidean)),
                 opt.max_iter);
}

std::string bench_lasso(const BenchOptions& opt) {
  const std::size_t rows = opt.rows ? opt.rows : 20;
  const std::size_t cols = opt.cols ? opt.cols : 30;
  const LinearOp K = desk::scaled_gaussian(rows, cols, 1.0, opt.seed);
  const LinearOp A = signed_permutation(cols, opt.seed + 1);
  // Sparse in z = A x.
  Vec z = Vec::Zero(static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < cols; i += 6) z[static_cast<Eigen::Index>(i)] = (i % 12 == 0) ? 1.0 : -1.0;
  const Vec y = add_noise(K.apply(A.adjoint_apply(z)), opt.noise_frac, opt.seed + 2);
  const Problem problem =
      make_problem(K, A, y, Penalty(default_lambda(opt, K, A, y, NormKind::block_euclidean), NormKind::block_euclidean));
  const Reference ref = reference_solution(problem);

  const desk::PairedRun run = desk::ista_pair(problem, 1.0, opt.max_iter);
  const std::vector<double> dev = per_iterate_deviation(run.lv_x, run.base_x);
  CsvWriter csv(problem, ref, run.tau, run.sigma);
  csv.rows("lv", run.lv_x, run.lv_w, nullptr);
  csv.rows("ista", run.base_x, run.base_w, &dev);
  return csv.str();
}

std::string bench_denoise(const BenchOptions& opt) {
  const std::size_t rows = opt.rows ? opt.rows : 16;
  const std::size_t cols = opt.cols ? opt.cols : 16;
  GridShape shape = Shape2D{rows, cols};
  Vec clean;
  if (rows == 1 || cols == 1) {
    const std::size_t n = rows * cols;
    shape = Shape1D{n};
    clean.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) clean[static_cast<Eigen::Index>(i)] = static_cast<double>((3 * i) / n);
  } else {
    clean = piecewise_constant_phantom(Shape2D{rows, cols});
  }
  const Vec g = add_noise(clean, opt.noise_frac, opt.seed);
  const LinearOp A = make_gradient(shape);
  const double lambda = default_lambda(opt, make_identity(g.size()), A, g, NormKind::block_euclidean);
  const Problem problem = make_tv_denoise(g, lambda, shape);
  const Reference ref = reference_solution(problem);

  const desk::PairedRun run = desk::gradient_projection_pair(problem, default_steps(problem).sigma, opt.max_iter);
  const std::vector<double> dev = per_iterate_deviation(run.lv_w, run.base_w);
  CsvWriter csv(problem, ref, run.tau, run.sigma);
  csv.rows("lv", run.lv_x, run.lv_w, nullptr);
  csv.rows("gradient-projection", run.base_x, run.base_w, &dev);
  return csv.str();
}

}  // namespace

int cmd_bench(const BenchOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (opt.max_iter < 1) throw InvalidArgument("--max-iter must be at least 1");
    std::string csv;
    if (opt.family == "tv-tomography") {
      csv = bench_tomography(opt);
    } else if (opt.family == "lasso") {
      csv = bench_lasso(opt);
    } else if (opt.family == "denoise") {
      csv = bench_denoise(opt);
    } else if (opt.family == "group") {
      csv = bench_group(opt);
    } else {
      throw InvalidArgument("unknown family '" + opt.family + "'");
    }
    if (opt.out.empty()) {
      out << csv;
    } else {
      std::ofstream f(opt.out, std::ios::binary);
      if (!f) throw IoError("cannot open '" + opt.out + "' for writing");
      f << csv;
      if (!f) throw IoError("write to '" + opt.out + "' failed");
    }
    return int{kOk};
  });
}

}  // namespace nsp::cli
