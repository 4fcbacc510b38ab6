#include "desk.hpp"

#include <cmath>
#include <random>
#include <string>

#include <Eigen/SVD>

#include "nsp/error.hpp"
#include "nsp/reference.hpp"

namespace nsp::desk {

double lambda_scale(const LinearOp& K, const LinearOp& A, const Vec& y, const Penalty& unit) {
  return dual_norm_max(unit, A.blocks(), A.apply(K.adjoint_apply(y)));
}

std::size_t active_blocks(const LinearOp& A, const Vec& x, double rel_tol) {
  const Vec ax = A.apply(x);
  const BlockLayout& layout = A.blocks();
  std::vector<double> norms(layout.block_count());
  double largest = 0.0;
  for (std::size_t b = 0; b < norms.size(); ++b) {
    norms[b] = ax.segment(static_cast<Eigen::Index>(layout.block_begin(b)),
                          static_cast<Eigen::Index>(layout.block_size(b)))
                   .norm();
    largest = std::max(largest, norms[b]);
  }
  std::size_t count = 0;
  for (double v : norms) count += v > rel_tol * (1.0 + largest) ? 1 : 0;
  return count;
}

LinearOp scaled_gaussian(std::size_t rows, std::size_t cols, double norm, std::uint64_t seed) {
  Eigen::MatrixXd m = gaussian_matrix(rows, cols, seed);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  m *= norm / svd.singularValues()(0);
  return make_dense(m);
}

Problem tv_regression(std::uint64_t seed) {
  constexpr std::size_t rows = 20;
  constexpr std::size_t cols = 30;
  LinearOp K = scaled_gaussian(rows, cols, 1.0, seed);
  LinearOp A = make_gradient(Shape1D{cols});

  Vec truth(cols);
  for (std::size_t i = 0; i < cols; ++i) truth[static_cast<Eigen::Index>(i)] = static_cast<double>((i / 4) % 3);
  Vec y = K.apply(truth);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  Vec noise(rows);
  for (auto& v : noise) v = normal(rng);
  y += 0.01 * y.norm() / noise.norm() * noise;

  const double scale = lambda_scale(K, A, y, Penalty(1.0, NormKind::block_euclidean));
  const std::size_t blocks = A.blocks().block_count();
  double best_lambda = scale;
  std::size_t best_miss = blocks;
  for (int k = 0; k <= 24; ++k) {
    const double lambda = scale * std::pow(10.0, -3.0 + 3.0 * k / 24.0);
    const Problem p = make_problem(K, A, y, Penalty(lambda, NormKind::block_euclidean));
    const SolverResult r = lv_solve(p, make_config(p, 20000, 1e-9));
    const std::size_t active = active_blocks(A, r.x);
    const std::size_t miss = active > blocks / 2 ? active - blocks / 2 : blocks / 2 - active;
    if (miss < best_miss) {
      best_miss = miss;
      best_lambda = lambda;
    }
  }
  return make_problem(std::move(K), std::move(A), std::move(y), Penalty(best_lambda, NormKind::block_euclidean));
}

Problem tv_denoise_1d(std::size_t n, std::uint64_t seed, double lambda) {
  if (n < 2) throw InvalidArgument("tv_denoise_1d: need n >= 2");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.3);
  Vec g(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    g[static_cast<Eigen::Index>(i)] = static_cast<double>((3 * i) / n) + normal(rng);
  }
  return make_tv_denoise(g, lambda, Shape1D{n});
}

namespace {

void require_orthogonal(const LinearOp& op, const char* what) {
  const Eigen::MatrixXd m = to_dense(op);
  if (m.rows() != m.cols() ||
      !(m.transpose() * m).isApprox(Eigen::MatrixXd::Identity(m.cols(), m.cols()), 1e-12)) {
    throw InvalidArgument(std::string(what) + " must be orthogonal");
  }
}

}  // namespace

PairedRun ista_pair(const Problem& problem, double tau, std::size_t iterations) {
  validate(problem);
  require_orthogonal(problem.A, "ista_pair: A");
  if (problem.A.block_dim() != 1) throw InvalidArgument("ista_pair: A needs scalar blocks");

  PairedRun run;
  run.tau = tau;
  run.sigma = 1.0;
  SolverConfig config;
  config.tau = tau;
  config.sigma = 1.0;
  config.max_iter = iterations;
  config.enforce_step_conditions = false;  // sigma ||A||^2 = 1 sits on the boundary
  config.observer = [&](std::size_t, const Vec& x, const Vec& w) {
    run.lv_x.push_back(x);
    run.lv_w.push_back(w);
  };
  lv_solve(problem, config);

  const Eigen::MatrixXd a = to_dense(problem.A);
  const LinearOp k_rot = make_dense(to_dense(problem.K) * a.transpose());
  Vec previous;
  ista_solve(k_rot, problem.y, problem.penalty.lambda, tau, iterations, std::nullopt,
             [&](std::size_t n, const Vec& z, const Vec&) {
               run.base_x.push_back(a.transpose() * z);
               if (n == 0) {
                 run.base_w.push_back(Vec::Zero(z.size()));
               } else {
                 const Vec u = previous + tau * k_rot.adjoint_apply(problem.y - k_rot.apply(previous));
                 run.base_w.push_back((u - z) / tau);
               }
               previous = z;
             });
  return run;
}

PairedRun gradient_projection_pair(const Problem& problem, double sigma, std::size_t iterations) {
  validate(problem);
  require_orthogonal(problem.K, "gradient_projection_pair: K");

  PairedRun run;
  run.tau = 1.0;
  run.sigma = sigma;
  SolverConfig config;
  config.tau = 1.0;
  config.sigma = sigma;
  config.max_iter = iterations;
  config.observer = [&](std::size_t, const Vec& x, const Vec& w) {
    run.lv_x.push_back(x);
    run.lv_w.push_back(w);
  };
  lv_solve(problem, config);

  Problem reduced = make_problem(make_identity(problem.K.in_dim()), problem.A, problem.K.adjoint_apply(problem.y),
                                 problem.penalty);
  gradient_projection_solve(reduced, sigma, iterations, std::nullopt, [&](std::size_t, const Vec& x, const Vec& w) {
    run.base_x.push_back(x);
    run.base_w.push_back(w);
  });
  return run;
}

double max_deviation(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  if (a.size() != b.size()) throw InvalidArgument("max_deviation: runs differ in length");
  double worst = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n) worst = std::max(worst, (a[n] - b[n]).lpNorm<Eigen::Infinity>());
  return worst;
}

}  // namespace nsp::desk
