#include <doctest.h>

#include <random>

#include "nsp/diagnostics.hpp"
#include "nsp/error.hpp"
#include "nsp/problems.hpp"
#include "oracles.hpp"

using namespace nsp;

namespace {

Problem random_tv_regression(std::size_t rows, std::size_t cols, std::uint64_t seed, double lambda) {
  Eigen::MatrixXd k = gaussian_matrix(rows, cols, seed);
  k /= std::sqrt(oracle::norm_sq(k));
  std::mt19937_64 rng(seed + 100);
  Vec y = oracle::random_vec(rows, rng);
  return make_problem(make_dense(k), make_gradient(Shape1D{cols}), std::move(y),
                      Penalty(lambda, NormKind::block_euclidean));
}

// Feasible dual point: random direction per block scaled into the ball.
Vec random_feasible(const Problem& p, std::mt19937_64& rng) {
  Vec w = oracle::random_vec(p.A.out_dim(), rng);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const BlockLayout& b = p.A.blocks();
  for (std::size_t k = 0; k < b.block_count(); ++k) {
    auto seg = w.segment(static_cast<Eigen::Index>(b.block_begin(k)), static_cast<Eigen::Index>(b.block_size(k)));
    seg *= p.penalty.lambda * u(rng) / std::max(seg.norm(), 1e-300);
  }
  return w;
}

SolverTrace snapshots(const Problem& p, SolverConfig c) {
  c.record_snapshots = true;
  return *lv_solve(p, c).trace;
}

}  // namespace

TEST_CASE("saddle value") {
  const Problem p = random_tv_regression(6, 8, 1, 0.3);
  std::mt19937_64 rng(1);
  const Vec x = oracle::random_vec(8, rng);
  CHECK(*saddle_value(p, x, Vec::Zero(7)) == doctest::Approx(0.5 * (p.K.apply(x) - p.y).squaredNorm()));

  // Maximizing block by block, w = lambda Ax / |Ax|, recovers the objective.
  const Vec ax = p.A.apply(x);
  Vec w_star(ax.size());
  for (Eigen::Index i = 0; i < ax.size(); ++i) w_star[i] = ax[i] > 0 ? p.penalty.lambda : -p.penalty.lambda;
  CHECK(*saddle_value(p, x, w_star) == doctest::Approx(objective(p, x)));
  for (int k = 0; k < 200; ++k) CHECK(*saddle_value(p, x, random_feasible(p, rng)) <= objective(p, x) + 1e-12);

  Vec bad = Vec::Zero(7);
  bad[2] = 2.0 * p.penalty.lambda;
  CHECK_FALSE(saddle_value(p, x, bad).has_value());
  CHECK_FALSE(dual_feasible(p, bad));
  CHECK(dual_feasible(p, w_star));
}

TEST_CASE("kkt check") {
  const Problem tiny = make_tv_denoise((Vec(3) << 0, 4, 1).finished(), 0.5, Shape1D{3});
  const StepSizes s = default_steps(tiny);
  SolverConfig c = make_config(tiny, 1'000'000, 1e-13);
  const SolverResult r = lv_solve(tiny, c);
  CHECK(kkt_check(tiny, r.x, r.w, s.tau, s.sigma, 1e-8).passed);

  // Least squares with w = 0 violates the dual equation when Ax != 0.
  const Problem ls = random_tv_regression(10, 6, 2, 0.5);
  const Eigen::MatrixXd k = to_dense(ls.K);
  const Vec x_ls = k.colPivHouseholderQr().solve(ls.y);
  REQUIRE(ls.A.apply(x_ls).norm() > 1e-3);
  const StepSizes t = default_steps(ls);
  const KktReport bad = kkt_check(ls, x_ls, Vec::Zero(5), t.tau, t.sigma, 1e-8);
  CHECK_FALSE(bad.passed);
  CHECK(bad.dual_fixed_point > 1e-8);

  const Problem zero = make_tv_denoise(Vec::Zero(4), 1.0, Shape1D{4});
  const KktReport z = kkt_check(zero, Vec::Zero(4), Vec::Zero(3), 0.5, 0.1, 0.0);
  CHECK(z.passed);
  CHECK(z.stationarity == 0.0);
  CHECK(z.dual_fixed_point == 0.0);
}

TEST_CASE("reference solutions") {
  const Problem two = make_tv_denoise((Vec(2) << 0, 10).finished(), 1.0, Shape1D{2});
  const Reference r = reference_solution(two);
  CHECK(std::abs(r.x[0] - 1.0) <= 1e-9);
  CHECK(std::abs(r.x[1] - 9.0) <= 1e-9);
  CHECK(r.certificate.passed);
  CHECK(r.certificate.stationarity <= 1e-10);
  CHECK(r.certificate.dual_fixed_point <= 1e-10);

  const Vec y = (Vec(3) << 1, -2, 5).finished();
  const Problem ls = make_problem(make_identity(3), make_identity(3), y, Penalty(1e-12, NormKind::block_euclidean));
  CHECK((reference_solution(ls).x - y).norm() <= 1e-9);

  ReferenceBudget tight;
  tight.max_iter = 3;
  CHECK_THROWS_AS(reference_solution(random_tv_regression(10, 15, 3, 0.05), tight), CertificationError);
  CHECK_THROWS_AS(certify(two, Vec::Zero(2), Vec::Zero(1), 0.5, 0.2, 1e-10), CertificationError);
}

TEST_CASE("gap definition, closed form and lower bound") {
  for (std::uint64_t seed : {4u, 5u, 6u}) {
    const Problem p = random_tv_regression(10, 15, seed, 0.05);
    const Reference ref = reference_solution(p);
    CHECK(std::abs(gap(p, ref.x, ref.w, ref).definition) <= 1e-10);
    std::mt19937_64 rng(seed);
    for (int k = 0; k < 100; ++k) {
      const Vec x = ref.x + oracle::random_vec(15, rng, 0.5);
      const Vec w = random_feasible(p, rng);
      const GapValue g = gap(p, x, w, ref);
      CHECK(std::abs(g.definition - g.closed_form) <= 1e-10 * std::max(1.0, std::abs(g.definition)));
      CHECK(g.definition >= -1e-10);
      CHECK(g.definition >= 0.5 * p.K.apply(ref.x - x).squaredNorm() - 1e-10);
    }
    Vec bad = Vec::Zero(14);
    bad[0] = 3.0;
    CHECK_THROWS_AS(gap(p, ref.x, bad, ref), InvalidArgument);
  }
  Reference fake;
  fake.x = Vec::Zero(2);
  fake.w = Vec::Zero(1);
  const Problem two = make_tv_denoise((Vec(2) << 0, 10).finished(), 1.0, Shape1D{2});
  CHECK_THROWS(gap(two, Vec::Zero(2), Vec::Zero(1), fake));
}

TEST_CASE("certified references are saddle points against random probes") {
  const Problem p = random_tv_regression(5, 4, 7, 0.2);
  const Reference ref = reference_solution(p);
  const double f_ref = *saddle_value(p, ref.x, ref.w);
  std::mt19937_64 rng(7);
  double worst = -1.0;
  for (int k = 0; k < 1000; ++k) {
    const Vec x = ref.x + oracle::random_vec(4, rng);
    const Vec w = random_feasible(p, rng);
    // F(x_ref, w) <= F(x_ref, w_ref) <= F(x, w_ref)
    worst = std::max(worst, *saddle_value(p, ref.x, w) - f_ref);
    worst = std::max(worst, f_ref - *saddle_value(p, x, ref.w));
  }
  CHECK(worst <= 1e-10);

  // A point that fails kkt_check is beaten by some probe.
  const Vec x_bad = ref.x + Vec::Constant(4, 0.1);
  const Vec w_bad = Vec::Zero(3);
  const StepSizes s = default_steps(p);
  REQUIRE_FALSE(kkt_check(p, x_bad, w_bad, s.tau, s.sigma, 1e-10).passed);
  const double f_bad = *saddle_value(p, x_bad, w_bad);
  double violation = 0.0;
  for (int k = 0; k < 1000; ++k) {
    violation = std::max(violation, *saddle_value(p, x_bad, random_feasible(p, rng)) - f_bad);
    violation = std::max(violation, f_bad - *saddle_value(p, x_bad + oracle::random_vec(4, rng, 0.2), w_bad));
  }
  CHECK(violation > 1e-10);
}

TEST_CASE("dual metric root") {
  const LinearOp A = make_gradient(Shape2D{3, 3});
  const double sigma = 0.9 / A.norm_sq_bound();
  const Eigen::MatrixXd b = dual_metric_root(A, sigma);
  const Eigen::MatrixXd a = oracle::columns(A);
  const Eigen::MatrixXd target = Eigen::MatrixXd::Identity(a.rows(), a.rows()) - sigma * a * a.transpose();
  CHECK((b.transpose() * b - target).norm() <= 1e-12);
  CHECK((b - b.transpose()).norm() <= 1e-12);
  CHECK_THROWS_AS(dual_metric_root(A, 1.5 / oracle::norm_sq(a)), InvalidArgument);
}

TEST_CASE("unit-step iteration on the rescaled problem matches the scaled one") {
  // K' = sqrt(tau) K, A' = sqrt(sigma) A, y' = sqrt(tau) y, lambda' = tau lambda / sqrt(sigma),
  // w' = tau w / sqrt(sigma). Run both and compare iterates, gap and error norm.
  const Problem p = random_tv_regression(10, 15, 11, 0.05);
  const double tau = 0.8 / p.K.norm_sq_bound();
  const double sigma = 0.6 / p.A.norm_sq_bound();
  const double rt = std::sqrt(tau), rs = std::sqrt(sigma);
  const Problem q = make_problem(make_scaled(p.K, rt), make_scaled(p.A, rs), rt * p.y,
                                 Penalty(tau * p.penalty.lambda / rs, NormKind::block_euclidean));

  SolverConfig cp = make_config(p, 300, 0.0);
  cp.tau = tau;
  cp.sigma = sigma;
  SolverConfig cq = make_config(q, 300, 0.0);
  cq.tau = 1.0;
  cq.sigma = 1.0;
  cq.enforce_step_conditions = false;  // the 1.01 norm inflation puts sigma' = 1 outside
  const SolverTrace tp = snapshots(p, cp);
  const SolverTrace tq = snapshots(q, cq);
  for (std::size_t n = 0; n < tp.x_snapshots.size(); n += 20) {
    CHECK((tp.x_snapshots[n] - tq.x_snapshots[n]).norm() <= 1e-10);
    CHECK((tau / rs * tp.w_snapshots[n] - tq.w_snapshots[n]).norm() <= 1e-10);
  }

  const Reference ref = reference_solution(p);
  const Vec wq_ref = tau / rs * ref.w;

  // Error norm in the rescaled variables with its own B' (B'^T B' = I - A' A'^T).
  const Eigen::MatrixXd a = oracle::columns(q.A);
  const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(a.rows(), a.rows()) - a * a.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const Eigen::MatrixXd bq = eig.operatorSqrt();
  const MonotonicityReport mono = monotonicity_check(p, tp, ref, tau, sigma);
  for (std::size_t n = 0; n < tp.x_snapshots.size(); n += 20) {
    const double mq = (tq.x_snapshots[n] - ref.x).squaredNorm() + (bq * (tq.w_snapshots[n] - wq_ref)).squaredNorm();
    CHECK(mono.error_norms[n] == doctest::Approx(mq).epsilon(1e-8));
  }

  // Gap in the rescaled variables equals tau * G.
  const auto fq = [&](const Vec& x, const Vec& w) {
    return 0.5 * (q.K.apply(x) - q.y).squaredNorm() + q.A.apply(x).dot(w);
  };
  const RateReport rate = rate_bound_check(p, tp, ref, tau, sigma);
  Vec xs = Vec::Zero(15), ws = Vec::Zero(14);
  for (std::size_t n = 1; n <= 50; ++n) {
    xs += tq.x_snapshots[n];
    ws += tq.w_snapshots[n];
    const Vec xa = xs / static_cast<double>(n);
    const Vec wa = ws / static_cast<double>(n);
    const double g_scaled = fq(xa, wq_ref) - fq(ref.x, wa);
    CHECK(rate.rows[n - 1].gap == doctest::Approx(g_scaled).epsilon(1e-8));
  }
}

TEST_CASE("rate bound check") {
  const Problem p = random_tv_regression(10, 15, 12, 0.05);
  const Reference ref = reference_solution(p);
  SolverConfig c = make_config(p, 1000, 0.0);
  c.tau = 1.0 / p.K.norm_sq_bound();
  const SolverTrace t = snapshots(p, c);
  const RateReport r = rate_bound_check(p, t, ref, c.tau, c.sigma);
  CHECK(r.rows.size() == 1000);
  CHECK(r.passed);
  CHECK(r.nonnegative);
  CHECK(r.min_gap >= -1e-10);
  for (const RateRow& row : r.rows) CHECK(row.gap <= row.bound * (1.0 + 1e-8) + 1e-12);

  SolverConfig at_ref = c;
  at_ref.max_iter = 1;
  at_ref.x0 = ref.x;
  at_ref.w0 = ref.w;
  const RateReport z = rate_bound_check(p, snapshots(p, at_ref), ref, c.tau, c.sigma);
  CHECK(z.passed);
  CHECK(std::abs(z.rows.front().gap) <= 1e-12);

  SolverConfig big = c;
  big.tau = 1.5 / p.K.norm_sq_bound();
  CHECK_THROWS_AS(rate_bound_check(p, t, ref, big.tau, c.sigma), InvalidArgument);
  CHECK_THROWS_AS(rate_bound_check(p, SolverTrace{}, ref, c.tau, c.sigma), InvalidArgument);
}

TEST_CASE("monotonicity check") {
  std::mt19937_64 rng(20);
  const Problem p = make_tv_denoise(oracle::random_vec(20, rng, 2.0), 0.5, Shape1D{20});
  const Reference ref = reference_solution(p);
  const SolverConfig c = make_config(p, 5000, 0.0);
  const MonotonicityReport m = monotonicity_check(p, snapshots(p, c), ref, c.tau, c.sigma);
  CHECK(m.passed);
  CHECK(m.error_norms.size() == 5001);
  CHECK(m.max_violation <= m.slack);

  SolverConfig start = c;
  start.max_iter = 50;
  start.x0 = ref.x;
  start.w0 = ref.w;
  const MonotonicityReport z = monotonicity_check(p, snapshots(p, start), ref, c.tau, c.sigma);
  CHECK(z.passed);
  for (double v : z.error_norms) CHECK(v <= 1e-18);

  // Step sizes past the condition break monotonicity and the check says so.
  SolverConfig bad = c;
  bad.max_iter = 30;
  bad.tau = 2.5 / p.K.norm_sq_bound();
  bad.enforce_step_conditions = false;
  CHECK_FALSE(monotonicity_check(p, snapshots(p, bad), ref, bad.tau, bad.sigma).passed);
  CHECK_THROWS_AS(monotonicity_check(p, SolverTrace{}, ref, c.tau, c.sigma), InvalidArgument);
}

TEST_CASE("objective increases are reported but never fail the check") {
  // Search seeds for a run whose objective goes up at least once.
  bool found = false;
  for (std::uint64_t seed = 0; seed < 20 && !found; ++seed) {
    const Problem p = random_tv_regression(10, 15, 30 + seed, 0.05);
    const Reference ref = reference_solution(p);
    const SolverConfig c = make_config(p, 500, 0.0);
    const MonotonicityReport m = monotonicity_check(p, snapshots(p, c), ref, c.tau, c.sigma);
    if (m.objective_increases > 0) {
      found = true;
      CHECK(m.passed);
    }
  }
  CHECK(found);
}
