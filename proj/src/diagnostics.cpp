#include "nsp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "nsp/error.hpp"

namespace nsp {

bool dual_feasible(const Problem& problem, const Vec& w) {
  const double lambda = problem.penalty.lambda;
  return dual_norm_max(problem.penalty, problem.A.blocks(), w) <= lambda * (1.0 + kFeasibilitySlack);
}

std::optional<double> saddle_value(const Problem& problem, const Vec& x, const Vec& w) {
  check_size("saddle_value: w", problem.A.out_dim(), static_cast<std::size_t>(w.size()));
  if (!dual_feasible(problem, w)) return std::nullopt;
  const Vec r = problem.K.apply(x) - problem.y;
  return 0.5 * r.squaredNorm() + problem.A.apply(x).dot(w);
}

KktReport kkt_check(const Problem& problem, const Vec& x, const Vec& w, double tau, double sigma, double tol) {
  check_size("kkt_check: x", problem.K.in_dim(), static_cast<std::size_t>(x.size()));
  check_size("kkt_check: w", problem.A.out_dim(), static_cast<std::size_t>(w.size()));
  KktReport report;
  const Vec grad = problem.K.adjoint_apply(problem.y - problem.K.apply(x));
  report.stationarity = (tau * grad - tau * problem.A.adjoint_apply(w)).norm();
  const double c = sigma / tau;
  const Vec u = w + c * problem.A.apply(x);
  report.dual_fixed_point = (w - prox_conjugate(problem.penalty, problem.A.blocks(), u, c)).norm();
  report.tol = tol;
  report.passed = report.stationarity <= tol && report.dual_fixed_point <= tol;
  return report;
}

Reference certify(const Problem& problem, const Vec& x, const Vec& w, double tau, double sigma, double tol) {
  Reference ref;
  ref.certificate = kkt_check(problem, x, w, tau, sigma, tol);
  if (!ref.certificate.passed) {
    throw CertificationError("reference failed KKT certification at tol " + std::to_string(tol) +
                             ": stationarity " + std::to_string(ref.certificate.stationarity) +
                             ", dual fixed point " + std::to_string(ref.certificate.dual_fixed_point));
  }
  ref.x = x;
  ref.w = w;
  ref.tau = tau;
  ref.sigma = sigma;
  ref.objective = objective(problem, x);
  return ref;
}

Reference reference_solution(const Problem& problem, const ReferenceBudget& budget) {
  const StepSizes steps = budget.steps ? *budget.steps : default_steps(problem, budget.margin);
  SolverConfig config;
  config.tau = steps.tau;
  config.sigma = steps.sigma;
  config.max_iter = budget.max_iter;
  config.fp_tol = budget.fp_tol;
  config.x0 = budget.x0;
  config.w0 = budget.w0;
  const SolverResult result = lv_solve(problem, config);
  Reference ref = certify(problem, result.x, result.w, steps.tau, steps.sigma, budget.certify_tol);
  ref.iterations = result.iterations;
  return ref;
}

namespace {

double saddle_or_throw(const Problem& problem, const Vec& x, const Vec& w, const char* which) {
  const auto v = saddle_value(problem, x, w);
  if (!v) throw InvalidArgument(std::string("gap: ") + which + " is not dual feasible");
  return *v;
}

void require_certified(const Reference& ref) {
  if (!ref.certificate.passed) throw CertificationError("gap: reference is not certified");
}

}  // namespace

GapValue gap(const Problem& problem, const Vec& x, const Vec& w, const Reference& ref) {
  require_certified(ref);
  GapValue g{};
  g.definition = saddle_or_throw(problem, x, ref.w, "reference w") - saddle_or_throw(problem, ref.x, w, "w");
  g.closed_form = 0.5 * problem.K.apply(ref.x - x).squaredNorm() + (ref.w - w).dot(problem.A.apply(ref.x));
  return g;
}

RateReport rate_bound_check(const Problem& problem, const SolverTrace& trace, const Reference& ref, double tau,
                            double sigma) {
  require_certified(ref);
  if (trace.x_snapshots.size() < 2 || trace.x_snapshots.size() != trace.w_snapshots.size()) {
    throw InvalidArgument("rate_bound_check: needs iterate snapshots x^0..x^N, w^0..w^N");
  }
  if (tau * problem.K.norm_sq_bound() > 1.0) {
    throw InvalidArgument("rate_bound_check: needs tau ||K||^2 <= 1 (got " +
                          std::to_string(tau * problem.K.norm_sq_bound()) + ")");
  }
  if (sigma * problem.A.norm_sq_bound() >= 1.0) {
    throw InvalidArgument("rate_bound_check: needs sigma ||A||^2 < 1");
  }

  const Vec& x0 = trace.x_snapshots.front();
  const Vec& w0 = trace.w_snapshots.front();
  const double numerator = (ref.x - x0).squaredNorm() + (tau * tau / sigma) * (ref.w - w0).squaredNorm();

  RateReport report;
  report.min_gap = std::numeric_limits<double>::infinity();
  report.nonnegative = true;
  report.passed = true;
  Vec x_avg = Vec::Zero(x0.size());
  Vec w_avg = Vec::Zero(w0.size());
  for (std::size_t n = 1; n < trace.x_snapshots.size(); ++n) {
    const double inv_n = 1.0 / static_cast<double>(n);
    x_avg += (trace.x_snapshots[n] - x_avg) * inv_n;
    w_avg += (trace.w_snapshots[n] - w_avg) * inv_n;
    const double g = tau * gap(problem, x_avg, w_avg, ref).definition;
    const double bound = numerator / (2.0 * static_cast<double>(n));
    report.rows.push_back({n, g, bound});
    report.min_gap = std::min(report.min_gap, g);
    if (bound > 0.0) report.worst_ratio = std::max(report.worst_ratio, g / bound);
    if (g < -1e-10) report.nonnegative = false;
    if (g > bound * (1.0 + 1e-8) + 1e-12) report.passed = false;
  }
  report.passed = report.passed && report.nonnegative;
  return report;
}

Eigen::MatrixXd dual_metric_root(const LinearOp& A, double sigma) {
  const Eigen::MatrixXd a = to_dense(A);
  const Eigen::Index p = a.rows();
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p, p) - sigma * a * a.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  if (eig.info() != Eigen::Success) throw Error("dual_metric_root: eigen-decomposition failed");
  const Vec& ev = eig.eigenvalues();
  if (ev.minCoeff() < -1e-12) {
    throw InvalidArgument("dual_metric_root: I - sigma A A^T is indefinite (min eigenvalue " +
                          std::to_string(ev.minCoeff()) + "); sigma ||A||^2 must be < 1");
  }
  const Vec root = ev.cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

MonotonicityReport monotonicity_check(const Problem& problem, const SolverTrace& trace, const Reference& ref,
                                      double tau, double sigma) {
  require_certified(ref);
  if (trace.x_snapshots.empty() || trace.x_snapshots.size() != trace.w_snapshots.size()) {
    throw InvalidArgument("monotonicity_check: needs iterate snapshots x^0..x^N, w^0..w^N");
  }
  const Eigen::MatrixXd b = dual_metric_root(problem.A, sigma);
  const double weight = tau * tau / sigma;

  MonotonicityReport report;
  double previous_objective = 0.0;
  for (std::size_t n = 0; n < trace.x_snapshots.size(); ++n) {
    const double m = (trace.x_snapshots[n] - ref.x).squaredNorm() +
                     weight * (b * (trace.w_snapshots[n] - ref.w)).squaredNorm();
    report.error_norms.push_back(m);
    const double obj = objective(problem, trace.x_snapshots[n]);
    if (n > 0 && obj > previous_objective) ++report.objective_increases;
    previous_objective = obj;
  }
  report.slack = 1e-10 * report.error_norms.front();
  report.max_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n + 1 < report.error_norms.size(); ++n) {
    const double v = report.error_norms[n + 1] - report.error_norms[n];
    if (v > report.max_violation) {
      report.max_violation = v;
      report.worst_step = n;
    }
  }
  if (report.error_norms.size() < 2) report.max_violation = 0.0;
  // An exact start at the reference has M_0 = 0; allow rounding-level noise there.
  report.passed = report.max_violation <= std::max(report.slack, 1e-18);
  return report;
}

}  // namespace nsp
