#pragma once

// Saddle-point quantities and the checks that verify the convergence theory
// of the primal-dual iteration on concrete runs.
//
// Scaling. The solver runs the step-size scaled iteration (tau, sigma). It is
// the unit-step iteration applied to sqrt(tau) K, sqrt(sigma) A, sqrt(tau) y
// with the dual variable renamed w' = (tau / sqrt(sigma)) w. In those
// variables the saddle function is tau * F(x, w), so
//   gap'(x, w)   = tau * gap(x, w)
//   ||w' - v'||^2 = (tau^2 / sigma) ||w - v||^2
//   B'^T B'      = I - sigma A A^T
// and the two quantitative results read, for unscaled (x, w):
//   tau * G(x~N, w~N) <= (||x+ - x0||^2 + (tau^2/sigma) ||w+ - w0||^2) / 2N
//       when tau ||K||^2 <= 1,
//   M_n = ||x^n - x+||^2 + (tau^2/sigma) ||B (w^n - w+)||^2 is non-increasing
//       when tau ||K||^2 < 2 and sigma ||A||^2 < 1.

#include <optional>
#include <vector>

#include "nsp/solver.hpp"

namespace nsp {

// F(x, w) = 1/2 ||K x - y||^2 + <A x, w> - H*(w). Empty when w is outside the
// dual ball (H*(w) = +inf, so the value is -inf).
std::optional<double> saddle_value(const Problem& problem, const Vec& x, const Vec& w);

// Dual feasibility with a relative slack of kFeasibilitySlack * lambda.
bool dual_feasible(const Problem& problem, const Vec& w);
inline constexpr double kFeasibilitySlack = 1e-12;

struct KktReport {
  double stationarity = 0.0;      // ||tau K^T(y - K x) - tau A^T w||
  double dual_fixed_point = 0.0;  // ||w - prox_{(sigma/tau) H*}(w + (sigma/tau) A x)||
  double tol = 0.0;
  bool passed = false;
};

KktReport kkt_check(const Problem& problem, const Vec& x, const Vec& w, double tau, double sigma, double tol);

// Approximate saddle point that passed kkt_check.
struct Reference {
  Vec x;
  Vec w;
  double tau = 0.0;
  double sigma = 0.0;
  std::size_t iterations = 0;
  double objective = 0.0;
  KktReport certificate;
};

struct ReferenceBudget {
  std::size_t max_iter = 1'000'000;
  double fp_tol = 1e-12;
  double certify_tol = 1e-10;
  double margin = 0.495;
  std::optional<StepSizes> steps;  // default_steps(margin) when empty
  std::optional<Vec> x0;
  std::optional<Vec> w0;
};

// Long solve followed by kkt_check; throws CertificationError unless both
// residuals end up below certify_tol.
Reference reference_solution(const Problem& problem, const ReferenceBudget& budget = {});

// Wraps a given pair after checking it; throws CertificationError on failure.
Reference certify(const Problem& problem, const Vec& x, const Vec& w, double tau, double sigma, double tol);

struct GapValue {
  double definition;   // F(x, w_ref) - F(x_ref, w)
  double closed_form;  // 1/2 ||K(x_ref - x)||^2 + <w_ref - w, A x_ref>
};

// Gap relative to a certified reference; w must be dual feasible.
GapValue gap(const Problem& problem, const Vec& x, const Vec& w, const Reference& ref);

struct RateRow {
  std::size_t n;
  double gap;    // tau * G(x~n, w~n)
  double bound;  // (||x_ref - x0||^2 + (tau^2/sigma) ||w_ref - w0||^2) / 2n
};

struct RateReport {
  std::vector<RateRow> rows;
  double min_gap = 0.0;
  double worst_ratio = 0.0;  // max gap / bound
  bool nonnegative = false;  // every gap >= -1e-10
  bool passed = false;       // nonnegative and gap <= bound (1 + 1e-8) + 1e-12 for all n
};

// Needs tau ||K||^2 <= 1 and sigma ||A||^2 < 1 and snapshots x^0..x^N, w^0..w^N.
RateReport rate_bound_check(const Problem& problem, const SolverTrace& trace, const Reference& ref, double tau,
                            double sigma);

struct MonotonicityReport {
  std::vector<double> error_norms;  // M_0..M_N
  double max_violation = 0.0;       // max over n of M_{n+1} - M_n
  std::size_t worst_step = 0;
  double slack = 0.0;               // 1e-10 * M_0
  // Informational only: the objective is not expected to decrease monotonically.
  std::size_t objective_increases = 0;
  bool passed = false;
};

// Principal square root of I - sigma A A^T; throws if sigma ||A||^2 > 1.
Eigen::MatrixXd dual_metric_root(const LinearOp& A, double sigma);

MonotonicityReport monotonicity_check(const Problem& problem, const SolverTrace& trace, const Reference& ref,
                                      double tau, double sigma);

}  // namespace nsp
