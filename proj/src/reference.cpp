#include "nsp/reference.hpp"

#include <string>

#include "nsp/error.hpp"

namespace nsp {
namespace {

SolverResult run_ista(const LinearOp& K, const Vec& y, double lambda, double tau, std::size_t max_iter,
                      const std::optional<Vec>& x0, const IterationObserver& observer) {
  check_size("ista: y", K.out_dim(), static_cast<std::size_t>(y.size()));
  if (!(tau > 0.0) || tau * K.norm_sq_bound() >= 2.0) {
    throw InvalidArgument("ista: tau = " + std::to_string(tau) + " violates 0 < tau < 2/||K||^2");
  }
  if (!(lambda >= 0.0)) throw InvalidArgument("ista: lambda must be non-negative");
  if (max_iter < 1) throw InvalidArgument("ista: max_iter must be >= 1");

  Vec x = x0 ? *x0 : Vec::Zero(K.in_dim());
  check_size("ista: x0", K.in_dim(), static_cast<std::size_t>(x.size()));
  const DivergenceGuard guard(x, y);
  const double threshold = tau * lambda;
  const Vec empty;
  if (observer) observer(0, x, empty);

  SolverResult result;
  result.x_avg = Vec::Zero(x.size());
  double step = 0.0;
  for (std::size_t n = 1; n <= max_iter; ++n) {
    const Vec v = x + tau * K.adjoint_apply(y - K.apply(x));
    // S_t(v) = v - clamp(v, -t, t)
    const Vec next = v - v.cwiseMax(-threshold).cwiseMin(threshold);
    step = (next - x).norm();
    x = next;
    guard.check(x, nullptr, n);
    result.x_avg += (x - result.x_avg) / static_cast<double>(n);
    if (observer) observer(n, x, empty);
  }
  result.x = x;
  result.iterations = max_iter;
  result.final_fp_residual = step;
  return result;
}

SolverResult run_gradient_projection(const LinearOp& A, const Vec& g, const Penalty& penalty, double sigma,
                                     std::size_t max_iter, const std::optional<Vec>& w0,
                                     const IterationObserver& observer) {
  check_size("gradient projection: g", A.in_dim(), static_cast<std::size_t>(g.size()));
  if (!(sigma > 0.0) || sigma * A.norm_sq_bound() >= 1.0) {
    throw InvalidArgument("gradient projection: sigma = " + std::to_string(sigma) +
                          " violates 0 < sigma < 1/||A||^2");
  }
  if (max_iter < 1) throw InvalidArgument("gradient projection: max_iter must be >= 1");

  Vec w = w0 ? *w0 : Vec::Zero(A.out_dim());
  check_size("gradient projection: w0", A.out_dim(), static_cast<std::size_t>(w.size()));
  Vec x = g - A.adjoint_apply(w);
  const DivergenceGuard guard(g, g);
  if (observer) observer(0, x, w);

  SolverResult result;
  result.x_avg = Vec::Zero(x.size());
  result.w_avg = Vec::Zero(w.size());
  double step = 0.0;
  for (std::size_t n = 1; n <= max_iter; ++n) {
    const Vec next = prox_conjugate(penalty, A.blocks(), w + sigma * A.apply(x), 1.0);
    step = (next - w).norm();
    w = next;
    x = g - A.adjoint_apply(w);
    guard.check(x, &w, n);
    result.x_avg += (x - result.x_avg) / static_cast<double>(n);
    result.w_avg += (w - result.w_avg) / static_cast<double>(n);
    if (observer) observer(n, x, w);
  }
  result.x = x;
  result.w = w;
  result.iterations = max_iter;
  result.final_fp_residual = step;
  return result;
}

}  // namespace

SolverResult ista_solve(const LinearOp& K, const Vec& y, double lambda, double tau, std::size_t max_iter,
                        const std::optional<Vec>& x0, const IterationObserver& observer) {
  return run_ista(K, y, lambda, tau, max_iter, x0, observer);
}

SolverResult ista_solve(const Problem& problem, double tau, std::size_t max_iter, const std::optional<Vec>& x0,
                        const IterationObserver& observer) {
  validate(problem);
  if (problem.A.kind() != OpKind::identity || problem.A.block_dim() != 1) {
    throw InvalidArgument(std::string("ista: needs A = identity with scalar blocks, got ") +
                          to_string(problem.A.kind()));
  }
  return run_ista(problem.K, problem.y, problem.penalty.lambda, tau, max_iter, x0, observer);
}

SolverResult gradient_projection_solve(const LinearOp& A, const Vec& g, double lambda, double sigma,
                                       std::size_t max_iter, const std::optional<Vec>& w0,
                                       const IterationObserver& observer) {
  return run_gradient_projection(A, g, Penalty(lambda, NormKind::block_euclidean), sigma, max_iter, w0,
                                 observer);
}

SolverResult gradient_projection_solve(const Problem& problem, double sigma, std::size_t max_iter,
                                       const std::optional<Vec>& w0, const IterationObserver& observer) {
  validate(problem);
  if (problem.K.kind() != OpKind::identity) {
    throw InvalidArgument(std::string("gradient projection: needs K = identity, got ") +
                          to_string(problem.K.kind()));
  }
  return run_gradient_projection(problem.A, problem.y, problem.penalty, sigma, max_iter, w0, observer);
}

}  // namespace nsp
