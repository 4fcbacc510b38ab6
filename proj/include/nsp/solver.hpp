#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "nsp/linops.hpp"
#include "nsp/prox.hpp"

namespace nsp {

// minimize 1/2 ||K x - y||^2 + H(A x)
struct Problem {
  LinearOp K;
  LinearOp A;
  Vec y;
  Penalty penalty;
};

// Checks K.in_dim == A.in_dim and y.size() == K.out_dim.
void validate(const Problem& problem);
Problem make_problem(LinearOp K, LinearOp A, Vec y, Penalty penalty);

struct StepSizes {
  double tau;
  double sigma;
};

// tau = margin * 2 / ||K||^2, sigma = margin / ||A||^2 (norms from norm_sq_bound).
// A zero operator takes its step from the other one; both zero is an error.
StepSizes default_steps(const Problem& problem, double margin = 0.495);

// Called with (n, x^n, w^n) for the start point (n = 0) and after every step.
using IterationObserver = std::function<void(std::size_t, const Vec&, const Vec&)>;

struct SolverConfig {
  double tau = 0.0;
  double sigma = 0.0;
  std::size_t max_iter = 1000;
  double fp_tol = 0.0;  // stop once fixed_point_residual <= fp_tol; 0 runs max_iter steps
  bool record_trace = false;
  bool record_snapshots = false;
  std::optional<Vec> x0;
  std::optional<Vec> w0;
  // Reject tau >= 2/||K||^2 and sigma >= 1/||A||^2. Only the reduction
  // identities (which need sigma = 1 with orthogonal A) and sabotage tests turn this off.
  bool enforce_step_conditions = true;
  IterationObserver observer;
};

SolverConfig make_config(const Problem& problem, std::size_t max_iter, double fp_tol,
                         double margin = 0.495);

void validate(const SolverConfig& config, const Problem& problem);

struct TraceRow {
  std::size_t n;
  double objective;
  double fp_residual;
  double dx_norm;
  double dw_norm;
};

struct SolverTrace {
  std::vector<TraceRow> rows;   // one per iteration, n = 1..N
  std::vector<Vec> x_snapshots;  // x^0..x^N when snapshots were requested
  std::vector<Vec> w_snapshots;
};

struct SolverResult {
  Vec x;
  Vec w;
  Vec x_avg;  // mean of x^1..x^N
  Vec w_avg;
  std::size_t iterations = 0;
  double final_fp_residual = 0.0;
  bool converged = false;  // fp_tol reached before max_iter
  std::optional<SolverTrace> trace;
};

struct Step {
  Vec x;
  Vec w;
  Vec xbar;
};

// One predictor / dual projection / corrector step:
//   xbar   = x + tau K^T(y - K x) - tau A^T w
//   w_next = prox_{(sigma/tau) H*}(w + (sigma/tau) A xbar)
//   x_next = x + tau K^T(y - K x) - tau A^T w_next
Step lv_step(const Problem& problem, const Vec& x, const Vec& w, double tau, double sigma);

SolverResult lv_solve(const Problem& problem, const SolverConfig& config);

// 1/2 ||K x - y||^2 + H(A x)
double objective(const Problem& problem, const Vec& x);

// ||tau K^T(y - K x) - tau A^T w|| + ||w - prox_{(sigma/tau) H*}(w + (sigma/tau) A x)||
double fixed_point_residual(const Problem& problem, const Vec& x, const Vec& w, double tau,
                            double sigma);

// Shared by the solvers: throws DivergenceError on non-finite entries or when
// ||x|| exceeds 1e12 * (1 + ||x0|| + ||y||).
struct DivergenceGuard {
  double limit;
  DivergenceGuard(const Vec& x0, const Vec& y);
  void check(const Vec& x, const Vec* w, std::size_t iteration) const;
};

}  // namespace nsp
