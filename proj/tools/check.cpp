#include <fstream>

#include <json.hpp>

#include "commands.hpp"
#include "desk.hpp"
#include "guard.hpp"
#include "nsp/diagnostics.hpp"
#include "nsp/reference.hpp"

namespace nsp::cli {
namespace {

using Json = nlohmann::ordered_json;

constexpr double kKktTol = 1e-8;
constexpr std::size_t kKktMaxIter = 200000;
constexpr std::size_t kRateIterations = 1000;
constexpr std::size_t kMonotoneIterations = 5000;
constexpr std::size_t kReductionIterations = 200;
constexpr double kReductionTol = 1e-12;
constexpr double kClosedFormTol = 1e-8;

Json entry(const std::string& name, bool passed, double margin, Json details) {
  Json j;
  j["name"] = name;
  j["passed"] = passed;
  j["margin"] = margin;
  j["details"] = std::move(details);
  return j;
}

// Runs lv_solve and keeps x^0..x^N, w^0..w^N even if the run diverges part way.
struct SnapshotRun {
  SolverTrace trace;
  std::optional<std::size_t> diverged_at;
};

SnapshotRun run_with_snapshots(const Problem& problem, SolverConfig config) {
  SnapshotRun run;
  config.observer = [&](std::size_t, const Vec& x, const Vec& w) {
    run.trace.x_snapshots.push_back(x);
    run.trace.w_snapshots.push_back(w);
  };
  try {
    lv_solve(problem, config);
  } catch (const DivergenceError& e) {
    run.diverged_at = e.iteration();
  }
  return run;
}

bool all_feasible(const Problem& problem, const std::vector<Vec>& ws, double& worst) {
  bool ok = true;
  for (const Vec& w : ws) {
    worst = std::max(worst, dual_norm_max(problem.penalty, problem.A.blocks(), w) / problem.penalty.lambda - 1.0);
    ok = ok && dual_feasible(problem, w);
  }
  return ok;
}

// KKT, rate, gap checks on the regression problem; appends the dual iterates
// of the rate run to feasibility_ws and returns the problem.
Problem regression_checks(std::uint64_t seed, Json& checks, std::vector<Vec>& feasibility_ws) {
  Problem problem = desk::tv_regression(seed);

  // KKT convergence with default steps.
  const SolverConfig config = make_config(problem, kKktMaxIter, kKktTol);
  const SolverResult r = lv_solve(problem, config);
  const KktReport kkt = kkt_check(problem, r.x, r.w, config.tau, config.sigma, kKktTol);
  checks.push_back(entry("kkt", r.converged && r.final_fp_residual <= kKktTol, kKktTol - r.final_fp_residual,
                         {{"lambda", problem.penalty.lambda},
                          {"active_blocks", desk::active_blocks(problem.A, r.x)},
                          {"blocks", problem.A.blocks().block_count()},
                          {"iterations", r.iterations},
                          {"stationarity", kkt.stationarity},
                          {"dual_fixed_point", kkt.dual_fixed_point}}));

  // Cesaro rate with tau ||K||^2 <= 1.
  const Reference ref = reference_solution(problem);
  SolverConfig rate_config = make_config(problem, kRateIterations, 0.0);
  rate_config.tau = 1.0 / problem.K.norm_sq_bound();
  const SnapshotRun run = run_with_snapshots(problem, rate_config);
  const RateReport rate = rate_bound_check(problem, run.trace, ref, rate_config.tau, rate_config.sigma);
  checks.push_back(entry("rate_bound", rate.passed, 1.0 - rate.worst_ratio,
                         {{"iterations", kRateIterations},
                          {"worst_ratio", rate.worst_ratio},
                          {"reference_iterations", ref.iterations},
                          {"reference_stationarity", ref.certificate.stationarity},
                          {"reference_dual_fixed_point", ref.certificate.dual_fixed_point}}));
  checks.push_back(entry("gap_nonnegative", rate.nonnegative, rate.min_gap + 1e-10, {{"min_gap", rate.min_gap}}));

  // Definition of the gap against its closed form along the Cesaro means.
  double worst = 0.0;
  Vec x_sum = Vec::Zero(problem.K.in_dim());
  Vec w_sum = Vec::Zero(problem.A.out_dim());
  for (std::size_t n = 1; n < run.trace.x_snapshots.size(); ++n) {
    x_sum += run.trace.x_snapshots[n];
    w_sum += run.trace.w_snapshots[n];
    if (n % 100 != 0 && n != 1) continue;
    const double inv = 1.0 / static_cast<double>(n);
    const GapValue g = gap(problem, x_sum * inv, w_sum * inv, ref);
    worst = std::max(worst, std::abs(g.definition - g.closed_form));
  }
  checks.push_back(entry("gap_closed_form", worst <= kClosedFormTol, kClosedFormTol - worst,
                         {{"max_difference", worst}}));

  feasibility_ws.insert(feasibility_ws.end(), run.trace.w_snapshots.begin(), run.trace.w_snapshots.end());
  return problem;
}

void monotonicity_checks(std::uint64_t seed, double step_factor, Json& checks) {
  const Problem problem = desk::tv_denoise_1d(20, seed);
  const Reference ref = reference_solution(problem);
  SolverConfig config = make_config(problem, kMonotoneIterations, 0.0);
  if (step_factor != 1.0) {
    config.tau *= step_factor;
    config.enforce_step_conditions = false;
  }
  const SnapshotRun run = run_with_snapshots(problem, config);
  const MonotonicityReport m = monotonicity_check(problem, run.trace, ref, config.tau, config.sigma);
  Json details = {{"iterations", run.trace.x_snapshots.size() - 1},
                  {"max_violation", m.max_violation},
                  {"worst_step", m.worst_step},
                  {"slack", m.slack},
                  {"objective_increases", m.objective_increases}};
  if (run.diverged_at) details["diverged_at"] = *run.diverged_at;
  if (step_factor != 1.0) details["step_factor"] = step_factor;
  checks.push_back(entry("monotonicity", m.passed, m.slack - m.max_violation, std::move(details)));

  double worst = 0.0;
  const bool ok = all_feasible(problem, run.trace.w_snapshots, worst);
  checks.push_back(entry("dual_feasibility_denoise", ok, kFeasibilitySlack - worst, {{"max_relative_excess", worst}}));
}

void reduction_checks(std::uint64_t seed, Json& checks) {
  const LinearOp K = desk::scaled_gaussian(20, 30, 1.4, seed + 11);
  const Vec y = K.apply(Vec::LinSpaced(30, -1.0, 1.0));
  double ista_dev = 0.0;
  for (const LinearOp& A : {make_identity(30), signed_permutation(30, seed + 12)}) {
    const double lambda = 0.1 * desk::lambda_scale(K, A, y, Penalty(1.0, NormKind::block_euclidean));
    const Problem p = make_problem(K, A, y, Penalty(lambda, NormKind::block_euclidean));
    const desk::PairedRun run = desk::ista_pair(p, 1.0, kReductionIterations);
    ista_dev = std::max(ista_dev, desk::max_deviation(run.lv_x, run.base_x));
  }
  checks.push_back(entry("reduction_ista", ista_dev <= kReductionTol, kReductionTol - ista_dev,
                         {{"max_deviation", ista_dev}, {"iterations", kReductionIterations}}));

  const LinearOp A = make_gradient(Shape1D{30});
  Vec g(30);
  for (Eigen::Index i = 0; i < 30; ++i) g[i] = static_cast<double>(i / 10) + 0.1 * std::sin(3.0 * static_cast<double>(i));
  double gp_dev = 0.0;
  for (const LinearOp& Kp : {make_identity(30), signed_permutation(30, seed + 13)}) {
    const Problem p = make_problem(Kp, A, Kp.apply(g), Penalty(0.3, NormKind::block_euclidean));
    const desk::PairedRun run = desk::gradient_projection_pair(p, default_steps(p).sigma, kReductionIterations);
    gp_dev = std::max(gp_dev, desk::max_deviation(run.lv_w, run.base_w));
  }
  checks.push_back(entry("reduction_gradient_projection", gp_dev <= kReductionTol, kReductionTol - gp_dev,
                         {{"max_deviation", gp_dev}, {"iterations", kReductionIterations}}));
}

}  // namespace

int cmd_check(const CheckOptions& opt, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!(opt.inject_step_factor > 0.0)) throw InvalidArgument("--inject-step-factor must be positive");
    Json checks = Json::array();
    std::vector<Vec> ws;
    const Problem regression = regression_checks(opt.seed, checks, ws);
    double worst = 0.0;
    const bool feasible = all_feasible(regression, ws, worst);
    checks.push_back(entry("dual_feasibility", feasible, kFeasibilitySlack - worst, {{"max_relative_excess", worst}}));
    monotonicity_checks(opt.seed, opt.inject_step_factor, checks);
    reduction_checks(opt.seed, checks);

    bool passed = true;
    Json failed = Json::array();
    for (const auto& c : checks) {
      if (!c["passed"].get<bool>()) {
        passed = false;
        failed.push_back(c["name"]);
      }
    }
    Json report;
    report["seed"] = opt.seed;
    report["passed"] = passed;
    report["failed"] = failed;
    report["checks"] = checks;
    const std::string text = report.dump(2) + "\n";
    if (opt.out.empty()) {
      out << text;
    } else {
      std::ofstream f(opt.out, std::ios::binary);
      if (!f) throw IoError("cannot open '" + opt.out + "' for writing");
      f << text;
      if (!f) throw IoError("write to '" + opt.out + "' failed");
    }
    if (!passed) err << "check failed: " << failed.dump() << '\n';
    return int{passed ? kOk : kCheckFailed};
  });
}

}  // namespace nsp::cli
