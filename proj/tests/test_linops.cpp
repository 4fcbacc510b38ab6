#include <doctest.h>

#include <random>

#include "nsp/error.hpp"
#include "nsp/linops.hpp"
#include "nsp/problems.hpp"
#include "oracles.hpp"

using namespace nsp;

namespace {

std::vector<LinearOp> every_kind() {
  std::mt19937_64 rng(42);
  std::vector<Triplet> t;
  std::uniform_int_distribution<std::size_t> r(0, 6), c(0, 8);
  std::normal_distribution<double> v;
  for (int k = 0; k < 20; ++k) t.push_back({r(rng), c(rng), v(rng)});
  return {
      make_identity(5),
      make_dense(gaussian_matrix(4, 6, 3)),
      make_sparse(7, 9, t),
      make_gradient(Shape1D{7}),
      make_gradient(Shape2D{3, 5}),
      make_gradient(Shape2D{1 + 1, 9}),
      make_group_selector({{0, 1}, {1, 2, 3}, {3}, {0}}, 5),
      make_scaled(make_gradient(Shape2D{4, 3}), -2.5),
  };
}

}  // namespace

TEST_CASE("apply examples") {
  Vec x(3);
  x << 1, 2, 4;
  CHECK(make_identity(3).apply(x) == x);
  const LinearOp g = make_gradient(Shape1D{3});
  CHECK(g.apply(x) == Vec((Vec(2) << 1, 2).finished()));
  CHECK(g.apply(Vec::Constant(3, 7.25)) == Vec::Zero(2));
  CHECK(g.adjoint_apply(Vec((Vec(2) << 1, 0).finished())) == Vec((Vec(3) << -1, 1, 0).finished()));
  CHECK(make_identity(2).adjoint_apply(Vec((Vec(2) << 1, 2).finished())) == Vec((Vec(2) << 1, 2).finished()));
}

TEST_CASE("dense and sparse examples") {
  const std::vector<double> eye{1, 0, 0, 1};
  const Vec x = (Vec(2) << 2, 3).finished();
  CHECK(make_dense(2, 2, eye).apply(x) == x);
  const std::vector<double> ones{1, 1};
  CHECK(make_dense(1, 2, ones).apply(x)[0] == 5.0);
  const std::vector<Triplet> t{{0, 1, 2.0}};
  CHECK(make_sparse(1, 2, t).apply((Vec(2) << 0, 5).finished())[0] == 10.0);
  CHECK(make_dense(2, 2, eye).block_dim() == 1);
}

TEST_CASE("sparse duplicates are summed") {
  const std::vector<Triplet> t{{0, 0, 1.0}, {0, 0, 2.5}, {1, 1, -1.0}};
  const Eigen::MatrixXd m = oracle::columns(make_sparse(2, 2, t));
  CHECK(m(0, 0) == 3.5);
  CHECK(m(1, 1) == -1.0);
}

TEST_CASE("size and construction errors") {
  const LinearOp g = make_gradient(Shape1D{4});
  CHECK_THROWS_AS(g.apply(Vec::Zero(3)), InvalidArgument);
  CHECK_THROWS_AS(g.adjoint_apply(Vec::Zero(4)), InvalidArgument);
  CHECK_THROWS_WITH_AS(g.apply(Vec::Zero(5)), doctest::Contains("expected 4, got 5"), InvalidArgument);
  CHECK_THROWS_AS(make_gradient(Shape1D{1}), InvalidArgument);
  CHECK_THROWS_AS(make_gradient(Shape2D{1, 5}), InvalidArgument);
  CHECK_THROWS_AS(make_group_selector({{0}, {}}, 2), InvalidArgument);
  CHECK_THROWS_AS(make_group_selector({{0, 2}}, 2), InvalidArgument);
  const std::vector<double> three{1, 2, 3};
  CHECK_THROWS_AS(make_dense(2, 2, three), InvalidArgument);
  const std::vector<Triplet> bad{{2, 0, 1.0}};
  CHECK_THROWS_AS(make_sparse(2, 2, bad), InvalidArgument);
}

TEST_CASE("gradient structure") {
  const LinearOp g1 = make_gradient(Shape1D{4});
  CHECK(g1.in_dim() == 4);
  CHECK(g1.out_dim() == 3);
  CHECK(g1.block_dim() == 1);
  const LinearOp g2 = make_gradient(Shape2D{2, 2});
  CHECK(g2.out_dim() == 8);
  CHECK(g2.block_dim() == 2);
  CHECK(g2.apply(Vec::Constant(4, -3.0)) == Vec::Zero(8));
  // x row-major [[1, 2], [4, 8]]: block of pixel (0,0) is (2-1, 4-1).
  const Vec y = g2.apply((Vec(4) << 1, 2, 4, 8).finished());
  CHECK(y == (Vec(8) << 1, 3, 0, 6, 4, 0, 0, 0).finished());
}

TEST_CASE("gradient kernel holds exactly for any constant") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int k = 0; k < 20; ++k) {
    const double c = u(rng);
    CHECK(make_gradient(Shape2D{5, 7}).apply(Vec::Constant(35, c)).isZero(0.0));
    CHECK(make_gradient(Shape1D{11}).apply(Vec::Constant(11, c)).isZero(0.0));
  }
}

TEST_CASE("group selector") {
  const LinearOp a = make_group_selector({{0, 1}, {1, 2}}, 3);
  CHECK(a.apply((Vec(3) << 3, 4, 0).finished()) == (Vec(4) << 3, 4, 4, 0).finished());
  CHECK(a.blocks().block_count() == 2);
  CHECK(a.blocks().block_size(0) == 2);

  const LinearOp disjoint = make_group_selector({{2, 0}, {1}, {3, 4}}, 5);
  const Eigen::MatrixXd m = oracle::columns(disjoint);
  CHECK((m.transpose() * m).isApprox(Eigen::MatrixXd::Identity(5, 5)));

  const LinearOp dup = make_group_selector({{0}, {0}}, 1);
  const Eigen::MatrixXd d = oracle::columns(dup);
  CHECK(oracle::norm_sq(d) == doctest::Approx(2.0));
  CHECK(oracle::norm_sq(d.transpose()) == doctest::Approx(2.0));
  CHECK((d * d.transpose()).diagonal().maxCoeff() == 1.0);
  CHECK(norm_sq_estimate(dup).value == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("norm estimates match eigen-solve oracles") {
  const NormEstimate id = norm_sq_estimate(make_identity(5));
  CHECK(id.value >= 1.0);
  CHECK(id.value <= 1.01);

  const Eigen::MatrixXd g3 = oracle::columns(make_gradient(Shape1D{3}));
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g3.transpose() * g3).eigenvalues();
  CHECK(ev[0] == doctest::Approx(0.0));
  CHECK(ev[1] == doctest::Approx(1.0));
  CHECK(ev[2] == doctest::Approx(3.0));
  const double est = norm_sq_estimate(make_gradient(Shape1D{3})).value;
  CHECK(est >= 3.0);
  CHECK(est <= 1.01 * 3.0);

  const LinearOp g22 = make_gradient(Shape2D{2, 2});
  const double exact = oracle::norm_sq(oracle::columns(g22));
  CHECK(exact <= 8.0 + 1e-12);
  CHECK(norm_sq_estimate(g22).value <= 8.08);
  CHECK(norm_sq_estimate(g22).value >= exact);

  const LinearOp inner = make_dense(gaussian_matrix(6, 4, 11));
  const double base = norm_sq_estimate(inner).value;
  CHECK(norm_sq_estimate(make_scaled(inner, 3.0)).value == doctest::Approx(9.0 * base).epsilon(1e-10));

  const std::vector<double> zeros(6, 0.0);
  CHECK(norm_sq_estimate(make_dense(2, 3, zeros)).value == 0.0);
}

TEST_CASE("norm estimate is deterministic and flags non-convergence") {
  const LinearOp a = make_dense(gaussian_matrix(30, 20, 5));
  CHECK(norm_sq_estimate(a).value == norm_sq_estimate(a).value);
  const NormEstimate short_run = norm_sq_estimate(make_gradient(Shape1D{200}), 1e-14, 2);
  CHECK_FALSE(short_run.converged);
  CHECK(short_run.iterations == 2);
  CHECK(short_run.value == doctest::Approx(kNormSafetyFactor * short_run.rayleigh));
}

TEST_CASE("adjoint, linearity and norm bound hold for every constructor") {
  std::mt19937_64 rng(2024);
  for (const LinearOp& op : every_kind()) {
    CAPTURE(std::string(to_string(op.kind())));
    const double bound = op.norm_sq_bound();
    CHECK(bound >= oracle::norm_sq(oracle::columns(op)));
    for (int k = 0; k < 100; ++k) {
      const Vec x = oracle::random_vec(op.in_dim(), rng);
      const Vec z = oracle::random_vec(op.in_dim(), rng);
      const Vec w = oracle::random_vec(op.out_dim(), rng);
      const Vec ax = op.apply(x);
      CHECK(std::abs(ax.dot(w) - x.dot(op.adjoint_apply(w))) <= 1e-12 * (1.0 + ax.norm() * w.norm()));
      CHECK(ax.squaredNorm() <= bound * x.squaredNorm());
      const Vec lhs = op.apply(1.5 * x - 0.25 * z);
      const Vec rhs = 1.5 * ax - 0.25 * op.apply(z);
      CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }
  }
}

TEST_CASE("to_dense agrees with column probes and with_blocks keeps the map") {
  for (const LinearOp& op : every_kind()) {
    CHECK(to_dense(op).isApprox(oracle::columns(op)));
  }
  const LinearOp a = make_identity(6);
  const LinearOp b = a.with_blocks(BlockLayout::uniform(6, 3));
  CHECK(b.block_dim() == 3);
  CHECK(b.blocks().block_count() == 2);
  const Vec x = Vec::LinSpaced(6, 0, 5);
  CHECK(b.apply(x) == a.apply(x));
  CHECK_THROWS_AS(BlockLayout::uniform(6, 4), InvalidArgument);
  CHECK_THROWS_AS(a.with_blocks(BlockLayout::uniform(4, 2)), InvalidArgument);
}
