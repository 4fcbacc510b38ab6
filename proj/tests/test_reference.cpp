#include <doctest.h>

#include <random>

#include "nsp/diagnostics.hpp"
#include "nsp/error.hpp"
#include "nsp/problems.hpp"
#include "nsp/reference.hpp"
#include "oracles.hpp"

using namespace nsp;

namespace {

// Gaussian matrix scaled to spectral norm `norm`, using the eigen-solve oracle.
LinearOp scaled_gaussian(std::size_t rows, std::size_t cols, double norm, std::uint64_t seed) {
  Eigen::MatrixXd m = gaussian_matrix(rows, cols, seed);
  m *= norm / std::sqrt(oracle::norm_sq(m));
  return make_dense(m);
}

double max_abs(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

}  // namespace

TEST_CASE("ista examples") {
  const LinearOp K = make_scaled(make_identity(2), 0.5);
  const Vec y = (Vec(2) << 4, -1).finished();
  const SolverResult one = ista_solve(K, y, 1.0, 1.0, 1);
  CHECK(one.x == (Vec(2) << 1, 0).finished());
  CHECK(one.w.size() == 0);

  const SolverResult landweber = ista_solve(make_identity(3), Vec::LinSpaced(3, 1, 3), 0.0, 1.0, 1);
  CHECK(landweber.x == Vec::LinSpaced(3, 1, 3));

  CHECK_THROWS_AS(ista_solve(K, y, 1.0, 2.0 / K.norm_sq_bound(), 5), InvalidArgument);
  CHECK_THROWS_AS(ista_solve(K, y, -1.0, 1.0, 5), InvalidArgument);
}

TEST_CASE("ista iterates are exactly zero where the argument is below the threshold") {
  const LinearOp K = scaled_gaussian(15, 25, 1.2, 3);
  std::mt19937_64 rng(3);
  const Vec y = oracle::random_vec(15, rng);
  const double tau = 1.0, lambda = 0.3;
  Vec previous = Vec::Zero(25);
  ista_solve(K, y, lambda, tau, 100, std::nullopt, [&](std::size_t n, const Vec& x, const Vec&) {
    if (n > 0) {
      const Vec arg = previous + tau * K.adjoint_apply(y - K.apply(previous));
      for (Eigen::Index i = 0; i < arg.size(); ++i) {
        if (std::abs(arg[i]) <= tau * lambda) CHECK(x[i] == 0.0);
      }
    }
    previous = x;
  });
}

TEST_CASE("ista problem overload requires A = identity") {
  const Problem ok = make_problem(make_identity(3), make_identity(3), Vec::Ones(3), Penalty(0.5, NormKind::block_euclidean));
  CHECK_NOTHROW(ista_solve(ok, 0.9, 5));
  const Problem grad = make_tv_denoise(Vec::Ones(3), 0.5, Shape1D{3});
  CHECK_THROWS_AS(ista_solve(grad, 0.9, 5), InvalidArgument);
}

TEST_CASE("gradient projection examples") {
  const LinearOp A = make_gradient(Shape1D{4});
  const SolverResult c = gradient_projection_solve(A, Vec::Constant(4, 2.5), 1.0, 0.25, 20);
  CHECK(c.w == Vec::Zero(3));
  CHECK(c.x == Vec::Constant(4, 2.5));

  const SolverResult two = gradient_projection_solve(make_gradient(Shape1D{2}), (Vec(2) << 0, 10).finished(), 1.0,
                                                     0.4, 2000);
  CHECK(std::abs(two.w[0]) == doctest::Approx(1.0));
  CHECK(two.x[0] == doctest::Approx(1.0));
  CHECK(two.x[1] == doctest::Approx(9.0));

  CHECK_THROWS_AS(gradient_projection_solve(A, Vec::Ones(4), 1.0, 1.0 / A.norm_sq_bound(), 5), InvalidArgument);
  const Problem notid = make_problem(make_scaled(make_identity(4), 2.0), A, Vec::Ones(4), Penalty());
  CHECK_THROWS_AS(gradient_projection_solve(notid, 0.1, 5), InvalidArgument);
}

TEST_CASE("gradient projection keeps the dual feasible") {
  std::mt19937_64 rng(5);
  const Vec g = oracle::random_vec(36, rng, 3.0);
  const LinearOp A = make_gradient(Shape2D{6, 6});
  const double sigma = 0.9 / A.norm_sq_bound();
  gradient_projection_solve(A, g, 0.7, sigma, 300, std::nullopt, [&](std::size_t, const Vec&, const Vec& w) {
    CHECK(dual_norm_max(Penalty(0.7, NormKind::block_euclidean), A.blocks(), w) <= 0.7 + 1e-14);
  });
}

TEST_CASE("reduction to ista with orthogonal A") {
  const LinearOp K = scaled_gaussian(20, 30, 1.4, 7);
  std::mt19937_64 rng(7);
  const Vec y = oracle::random_vec(20, rng);
  const double lambda = 0.05, tau = 1.0;
  for (const LinearOp& A : {make_identity(30), signed_permutation(30, 8)}) {
    CAPTURE(std::string(to_string(A.kind())));
    const Eigen::MatrixXd a = oracle::columns(A);
    REQUIRE((a * a.transpose()).isApprox(Eigen::MatrixXd::Identity(30, 30)));
    const Problem p = make_problem(K, A, y, Penalty(lambda, NormKind::block_euclidean));

    std::vector<Vec> lv;
    SolverConfig c;
    c.tau = tau;
    c.sigma = 1.0;  // boundary of the dual step condition; needed for the reduction
    c.max_iter = 200;
    c.enforce_step_conditions = false;
    c.observer = [&](std::size_t, const Vec& x, const Vec&) { lv.push_back(x); };
    lv_solve(p, c);

    // ISTA on K A^T in z = A x, threshold tau * lambda.
    const LinearOp rotated = make_dense(oracle::columns(K) * a.transpose());
    std::vector<Vec> ista;
    ista_solve(rotated, y, lambda, tau, 200, std::nullopt,
               [&](std::size_t, const Vec& z, const Vec&) { ista.push_back(a.transpose() * z); });
    REQUIRE(lv.size() == 201);
    REQUIRE(ista.size() == 201);
    double worst = 0.0;
    for (std::size_t n = 0; n < lv.size(); ++n) worst = std::max(worst, max_abs(lv[n] - ista[n]));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("reduction to gradient projection with orthogonal K") {
  std::mt19937_64 rng(9);
  const LinearOp A = make_gradient(Shape1D{30});
  const Vec y = oracle::random_vec(30, rng, 2.0);
  const double lambda = 0.4;
  for (const LinearOp& K : {make_identity(30), signed_permutation(30, 10)}) {
    const Problem p = make_problem(K, A, y, Penalty(lambda, NormKind::block_euclidean));
    const double sigma = default_steps(p).sigma;
    std::vector<Vec> lv;
    SolverConfig c;
    c.tau = 1.0;
    c.sigma = sigma;
    c.max_iter = 200;
    c.observer = [&](std::size_t, const Vec&, const Vec& w) { lv.push_back(w); };
    lv_solve(p, c);

    std::vector<Vec> gp;
    gradient_projection_solve(A, K.adjoint_apply(y), lambda, sigma, 200, std::nullopt,
                              [&](std::size_t, const Vec&, const Vec& w) { gp.push_back(w); });
    REQUIRE(lv.size() == gp.size());
    double worst = 0.0;
    for (std::size_t n = 0; n < lv.size(); ++n) worst = std::max(worst, max_abs(lv[n] - gp[n]));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("baselines reach the solver's minimizer") {
  const LinearOp K = scaled_gaussian(12, 18, 1.0, 13);
  std::mt19937_64 rng(13);
  const Vec y = oracle::random_vec(12, rng);
  const Problem lasso = make_problem(K, make_identity(18), y, Penalty(0.05, NormKind::block_euclidean));
  const Reference ref = reference_solution(lasso);
  const SolverResult ista = ista_solve(lasso, 1.0, 200000);
  CHECK(std::abs(objective(lasso, ista.x) - ref.objective) <= 1e-9);

  const Vec g = oracle::random_vec(20, rng, 2.0);
  const Problem tv = make_tv_denoise(g, 0.3, Shape1D{20});
  const Reference tref = reference_solution(tv);
  const SolverResult gp = gradient_projection_solve(tv, default_steps(tv).sigma, 200000);
  CHECK(std::abs(objective(tv, gp.x) - tref.objective) <= 1e-9);
}
