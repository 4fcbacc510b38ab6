#include "nsp/solver.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <string>

#include "nsp/error.hpp"

namespace nsp {
namespace {

std::span<double> as_span(Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

void validate(const Problem& problem) {
  check_size("problem: A.in_dim vs K.in_dim", problem.K.in_dim(), problem.A.in_dim());
  check_size("problem: y vs K.out_dim", problem.K.out_dim(), static_cast<std::size_t>(problem.y.size()));
  if (!problem.y.allFinite()) throw InvalidArgument("problem: y has non-finite entries");
  if (!(problem.penalty.lambda > 0.0)) throw InvalidArgument("problem: lambda must be positive");
}

Problem make_problem(LinearOp K, LinearOp A, Vec y, Penalty penalty) {
  Problem p{std::move(K), std::move(A), std::move(y), penalty};
  validate(p);
  return p;
}

StepSizes default_steps(const Problem& problem, double margin) {
  if (!(margin > 0.0 && margin < 1.0)) {
    throw InvalidArgument("default_steps: margin must lie in (0, 1), got " + std::to_string(margin));
  }
  const double k2 = problem.K.norm_sq_bound();
  const double a2 = problem.A.norm_sq_bound();
  if (k2 == 0.0 && a2 == 0.0) throw InvalidArgument("default_steps: K and A are both zero");
  StepSizes s{};
  s.tau = margin * 2.0 / (k2 > 0.0 ? k2 : a2);
  s.sigma = margin / (a2 > 0.0 ? a2 : k2);
  return s;
}

SolverConfig make_config(const Problem& problem, std::size_t max_iter, double fp_tol, double margin) {
  const StepSizes s = default_steps(problem, margin);
  SolverConfig c;
  c.tau = s.tau;
  c.sigma = s.sigma;
  c.max_iter = max_iter;
  c.fp_tol = fp_tol;
  return c;
}

void validate(const SolverConfig& config, const Problem& problem) {
  if (!(config.tau > 0.0) || !std::isfinite(config.tau)) throw InvalidArgument("solver: tau must be positive");
  if (!(config.sigma > 0.0) || !std::isfinite(config.sigma)) throw InvalidArgument("solver: sigma must be positive");
  if (config.max_iter < 1) throw InvalidArgument("solver: max_iter must be >= 1");
  if (!(config.fp_tol >= 0.0)) throw InvalidArgument("solver: fp_tol must be non-negative");
  if (config.x0) check_size("solver: x0", problem.K.in_dim(), static_cast<std::size_t>(config.x0->size()));
  if (config.w0) check_size("solver: w0", problem.A.out_dim(), static_cast<std::size_t>(config.w0->size()));
  if (config.enforce_step_conditions) {
    const double k2 = problem.K.norm_sq_bound();
    const double a2 = problem.A.norm_sq_bound();
    if (config.tau * k2 >= 2.0) {
      throw InvalidArgument("solver: tau = " + std::to_string(config.tau) + " violates tau < 2/||K||^2 = " +
                            std::to_string(2.0 / k2));
    }
    if (config.sigma * a2 >= 1.0) {
      throw InvalidArgument("solver: sigma = " + std::to_string(config.sigma) +
                            " violates sigma < 1/||A||^2 = " + std::to_string(1.0 / a2));
    }
  }
}

DivergenceGuard::DivergenceGuard(const Vec& x0, const Vec& y) : limit(1e12 * (1.0 + x0.norm() + y.norm())) {}

void DivergenceGuard::check(const Vec& x, const Vec* w, std::size_t iteration) const {
  if (!x.allFinite()) {
    throw DivergenceError("non-finite value in x at iteration " + std::to_string(iteration), iteration);
  }
  if (w != nullptr && !w->allFinite()) {
    throw DivergenceError("non-finite value in w at iteration " + std::to_string(iteration), iteration);
  }
  const double nx = x.norm();
  if (nx > limit) {
    throw DivergenceError("iterates diverged at iteration " + std::to_string(iteration) + ": ||x|| = " +
                              std::to_string(nx) + " exceeds " + std::to_string(limit) +
                              " (step sizes too large for the operator norms?)",
                          iteration);
  }
}

double objective(const Problem& problem, const Vec& x) {
  const Vec r = problem.K.apply(x) - problem.y;
  return 0.5 * r.squaredNorm() + penalty_value(problem.penalty, problem.A.blocks(), problem.A.apply(x));
}

double fixed_point_residual(const Problem& problem, const Vec& x, const Vec& w, double tau, double sigma) {
  const Vec grad = problem.K.adjoint_apply(problem.y - problem.K.apply(x));
  const double primal = (tau * grad - tau * problem.A.adjoint_apply(w)).norm();
  const double c = sigma / tau;
  const Vec u = w + c * problem.A.apply(x);
  const double dual = (w - prox_conjugate(problem.penalty, problem.A.blocks(), u, c)).norm();
  return primal + dual;
}

namespace {

// Iteration state with the products that carry over between steps, so each
// step costs one application each of K, K^T, A and A^T.
class Iterator {
 public:
  Iterator(const Problem& p, double tau, double sigma, Vec x, Vec w)
      : p_(p), tau_(tau), sigma_(sigma), x_(std::move(x)), w_(std::move(w)) {
    residual_ = p_.y - p_.K.apply(x_);
    grad_ = p_.K.adjoint_apply(residual_);
    atw_ = p_.A.adjoint_apply(w_);
    xbar_.resize(x_.size());
    ax_.resize(p_.A.out_dim());
    u_.resize(p_.A.out_dim());
    w_next_.resize(p_.A.out_dim());
  }

  void step() {
    const double c = sigma_ / tau_;
    xbar_ = x_ + tau_ * (grad_ - atw_);
    p_.A.apply_into(as_span(xbar_), as_span(ax_));
    u_ = w_ + c * ax_;
    prox_conjugate_into(p_.penalty, p_.A.blocks(), as_span(u_), c, as_span(w_next_));
#ifndef NDEBUG
    const Vec atw_old = atw_;
#endif
    p_.A.adjoint_into(as_span(w_next_), as_span(atw_));
    dx_ = x_;
    x_ += tau_ * (grad_ - atw_);
    dx_ = x_ - dx_;
    dw_ = w_next_ - w_;
#ifndef NDEBUG
    // Pseudo-implicit form: xbar = x_next - tau A^T (w - w_next).
    const Vec implicit = x_ - tau_ * (atw_old - atw_);
    assert((implicit - xbar_).norm() <= 1e-12 * (1.0 + xbar_.norm()));
#endif
    std::swap(w_, w_next_);
    residual_ = p_.y - p_.K.apply(x_);
    p_.K.adjoint_into(as_span(residual_), as_span(grad_));
  }

  // Objective and fixed-point residual at the current iterate; costs one A.
  std::pair<double, double> evaluate() {
    p_.A.apply_into(as_span(x_), as_span(ax_));
    const double c = sigma_ / tau_;
    const double primal = tau_ * (grad_ - atw_).norm();
    u_ = w_ + c * ax_;
    prox_conjugate_into(p_.penalty, p_.A.blocks(), as_span(u_), c, as_span(w_next_));
    const double dual = (w_ - w_next_).norm();
    const double obj = 0.5 * residual_.squaredNorm() + penalty_value(p_.penalty, p_.A.blocks(), ax_);
    return {obj, primal + dual};
  }

  const Vec& x() const { return x_; }
  const Vec& w() const { return w_; }
  const Vec& xbar() const { return xbar_; }
  const Vec& dx() const { return dx_; }
  const Vec& dw() const { return dw_; }

 private:
  const Problem& p_;
  double tau_;
  double sigma_;
  Vec x_, w_;
  Vec residual_, grad_, atw_;
  Vec xbar_, ax_, u_, w_next_;
  Vec dx_, dw_;
};

}  // namespace

Step lv_step(const Problem& problem, const Vec& x, const Vec& w, double tau, double sigma) {
  validate(problem);
  check_size("lv_step: x", problem.K.in_dim(), static_cast<std::size_t>(x.size()));
  check_size("lv_step: w", problem.A.out_dim(), static_cast<std::size_t>(w.size()));
  Iterator it(problem, tau, sigma, x, w);
  it.step();
  DivergenceGuard(x, problem.y).check(it.x(), &it.w(), 1);
  return {it.x(), it.w(), it.xbar()};
}

SolverResult lv_solve(const Problem& problem, const SolverConfig& config) {
  validate(problem);
  validate(config, problem);

  Vec x0 = config.x0 ? *config.x0 : Vec::Zero(problem.K.in_dim());
  Vec w0 = config.w0 ? *config.w0 : Vec::Zero(problem.A.out_dim());
  const DivergenceGuard guard(x0, problem.y);

  SolverResult result;
  if (config.record_trace || config.record_snapshots) result.trace.emplace();
  auto notify = [&](std::size_t n, const Vec& x, const Vec& w) {
    if (config.record_snapshots) {
      result.trace->x_snapshots.push_back(x);
      result.trace->w_snapshots.push_back(w);
    }
    if (config.observer) config.observer(n, x, w);
  };
  notify(0, x0, w0);

  Iterator it(problem, config.tau, config.sigma, std::move(x0), std::move(w0));
  result.x_avg = Vec::Zero(problem.K.in_dim());
  result.w_avg = Vec::Zero(problem.A.out_dim());
  const bool evaluate_each = config.fp_tol > 0.0 || config.record_trace;

  std::size_t n = 0;
  double fp = std::numeric_limits<double>::infinity();
  while (n < config.max_iter) {
    it.step();
    ++n;
    guard.check(it.x(), &it.w(), n);
    const double inv_n = 1.0 / static_cast<double>(n);
    result.x_avg += (it.x() - result.x_avg) * inv_n;
    result.w_avg += (it.w() - result.w_avg) * inv_n;
    notify(n, it.x(), it.w());
    if (evaluate_each) {
      const auto [obj, res] = it.evaluate();
      fp = res;
      if (config.record_trace) {
        result.trace->rows.push_back({n, obj, res, it.dx().norm(), it.dw().norm()});
      }
      if (config.fp_tol > 0.0 && fp <= config.fp_tol) {
        result.converged = true;
        break;
      }
    }
  }
  if (!evaluate_each) fp = it.evaluate().second;

  result.x = it.x();
  result.w = it.w();
  result.iterations = n;
  result.final_fp_residual = fp;
  return result;
}

}  // namespace nsp
