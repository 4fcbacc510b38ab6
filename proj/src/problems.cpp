#include "nsp/problems.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <string>

#include "nsp/error.hpp"

namespace nsp {

Problem make_tv_denoise(const Vec& g, double lambda, const GridShape& shape) {
  check_size("tv denoise: image", pixel_count(shape), static_cast<std::size_t>(g.size()));
  return make_problem(make_identity(static_cast<std::size_t>(g.size())), make_gradient(shape), g,
                      Penalty(lambda, NormKind::block_euclidean));
}

Problem make_group_sparsity(const LinearOp& K, const Vec& y, const std::vector<std::vector<std::size_t>>& groups,
                            double lambda) {
  return make_problem(K, make_group_selector(groups, K.in_dim()), y, Penalty(lambda, NormKind::block_euclidean));
}

Problem TomographyData::with_lambda(double lambda) const {
  return make_problem(K, A, y, Penalty(lambda, NormKind::block_euclidean));
}

namespace {

struct Point {
  double x;
  double y;
};

// Point at arc length t along the boundary of [0, w] x [0, h], counter-clockwise
// from the origin; side is 0 bottom, 1 right, 2 top, 3 left.
std::pair<Point, int> boundary_point(double t, double w, double h) {
  if (t < w) return {{t, 0.0}, 0};
  t -= w;
  if (t < h) return {{w, t}, 1};
  t -= h;
  if (t < w) return {{w - t, h}, 2};
  t -= w;
  return {{0.0, h - std::min(t, h)}, 3};
}

// Exact intersection lengths of segment p0-p1 with the unit cells of the grid,
// keyed by row-major cell index.
std::map<std::size_t, double> trace_ray(Point p0, Point p1, std::size_t rows, std::size_t cols) {
  const double dx = p1.x - p0.x;
  const double dy = p1.y - p0.y;
  const double length = std::hypot(dx, dy);
  std::vector<double> alphas{0.0, 1.0};
  if (dx != 0.0) {
    for (std::size_t k = 0; k <= cols; ++k) {
      const double a = (static_cast<double>(k) - p0.x) / dx;
      if (a > 0.0 && a < 1.0) alphas.push_back(a);
    }
  }
  if (dy != 0.0) {
    for (std::size_t k = 0; k <= rows; ++k) {
      const double a = (static_cast<double>(k) - p0.y) / dy;
      if (a > 0.0 && a < 1.0) alphas.push_back(a);
    }
  }
  std::sort(alphas.begin(), alphas.end());
  std::map<std::size_t, double> cells;
  for (std::size_t k = 0; k + 1 < alphas.size(); ++k) {
    const double da = alphas[k + 1] - alphas[k];
    if (da <= 0.0) continue;
    const double mid = 0.5 * (alphas[k] + alphas[k + 1]);
    const double mx = p0.x + mid * dx;
    const double my = p0.y + mid * dy;
    const auto j = static_cast<std::size_t>(std::clamp(std::floor(mx), 0.0, static_cast<double>(cols - 1)));
    const auto i = static_cast<std::size_t>(std::clamp(std::floor(my), 0.0, static_cast<double>(rows - 1)));
    cells[i * cols + j] += da * length;
  }
  return cells;
}

}  // namespace

TomographyData make_tv_tomography(const Shape2D& shape, const Vec& x_in, std::size_t n_rays, double noise_frac,
                                  std::uint64_t seed) {
  if (n_rays < 1) throw InvalidArgument("tomography: n_rays must be >= 1");
  if (!(noise_frac >= 0.0 && noise_frac < 1.0)) {
    throw InvalidArgument("tomography: noise_frac must lie in [0, 1), got " + std::to_string(noise_frac));
  }
  const std::size_t n = shape.rows * shape.cols;
  check_size("tomography: x_in", n, static_cast<std::size_t>(x_in.size()));

  std::mt19937_64 rng(seed);
  const double w = static_cast<double>(shape.cols);
  const double h = static_cast<double>(shape.rows);
  std::uniform_real_distribution<double> along(0.0, 2.0 * (w + h));
  constexpr int kMaxRetries = 1000;

  std::vector<double> ray_lengths;
  std::vector<RaySegment> rays;
  std::vector<Triplet> triplets;
  for (std::size_t r = 0; r < n_rays; ++r) {
    int attempts = 0;
    while (true) {
      if (++attempts > kMaxRetries) {
        throw Error("tomography: could not draw a non-degenerate ray after " + std::to_string(kMaxRetries) +
                    " attempts");
      }
      const auto [p0, s0] = boundary_point(along(rng), w, h);
      const auto [p1, s1] = boundary_point(along(rng), w, h);
      // Chords with both ends on one side run along the boundary.
      if (s0 == s1) continue;
      const double len = std::hypot(p1.x - p0.x, p1.y - p0.y);
      if (len < 1e-9) continue;
      const auto cells = trace_ray(p0, p1, shape.rows, shape.cols);
      if (cells.empty()) continue;
      for (const auto& [cell, l] : cells) triplets.push_back({r, cell, l});
      ray_lengths.push_back(len);
      rays.push_back({p0.x, p0.y, p1.x, p1.y});
      break;
    }
  }
  TomographyData data{shape, make_sparse(n_rays, n, triplets), make_gradient(shape), x_in, Vec(), Vec(), 0.0,
                      std::move(ray_lengths), std::move(rays)};
  data.clean = data.K.apply(x_in);

  Vec noise(static_cast<Eigen::Index>(n_rays));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < noise.size(); ++i) noise[i] = gauss(rng);
  const double target = noise_frac * data.clean.norm();
  if (target > 0.0) {
    noise *= target / noise.norm();
  } else {
    noise.setZero();
  }
  data.y = data.clean + noise;
  data.noise_norm = noise.norm();
  return data;
}

Vec piecewise_constant_phantom(const Shape2D& shape) {
  const double rows = static_cast<double>(shape.rows);
  const double cols = static_cast<double>(shape.cols);
  Vec img = Vec::Zero(static_cast<Eigen::Index>(shape.rows * shape.cols));
  for (std::size_t i = 0; i < shape.rows; ++i) {
    for (std::size_t j = 0; j < shape.cols; ++j) {
      const double y = (static_cast<double>(i) + 0.5) / rows;
      const double x = (static_cast<double>(j) + 0.5) / cols;
      double v = 0.0;
      if (x > 0.1 && x < 0.5 && y > 0.15 && y < 0.55) v = 1.0;
      if (std::hypot(x - 0.68, y - 0.62) < 0.22) v = -0.5;
      if (x < 0.35 && y > 0.7 && y - 0.7 > x - 0.05) v = 0.5;
      img[static_cast<Eigen::Index>(i * shape.cols + j)] = v;
    }
  }
  return img;
}

Eigen::MatrixXd gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = gauss(rng);
  }
  return m;
}

LinearOp signed_permutation(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, perm[i], (rng() & 1U) ? 1.0 : -1.0});
  return make_sparse(n, n, t);
}

CalibrationResult calibrate_lambda(const std::function<Problem(double)>& make_problem_for, double target_residual,
                                   const CalibrationOptions& options) {
  if (!(target_residual > 0.0)) throw InvalidArgument("calibrate_lambda: target residual must be positive");
  if (!(options.lambda_init > 0.0)) throw InvalidArgument("calibrate_lambda: lambda_init must be positive");

  CalibrationResult out;
  std::vector<SolverResult> solutions;
  const double slack = options.monotone_slack_rel * target_residual;

  auto probe = [&](double lambda) -> double {
    if (out.probes.size() >= options.max_probes) {
      throw Error("calibrate_lambda: probe budget of " + std::to_string(options.max_probes) + " exhausted");
    }
    const Problem problem = make_problem_for(lambda);
    SolverConfig config = make_config(problem, options.max_iter, options.fp_tol, options.margin);
    // Warm start from the probe closest in log(lambda).
    std::size_t best = solutions.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < solutions.size(); ++k) {
      const double d = std::abs(std::log(out.probes[k].lambda / lambda));
      if (d < best_dist) {
        best_dist = d;
        best = k;
      }
    }
    if (best < solutions.size()) {
      config.x0 = solutions[best].x;
      config.w0 = solutions[best].w;
    }
    SolverResult sol = lv_solve(problem, config);
    const double residual = (problem.K.apply(sol.x) - problem.y).norm();
    for (const auto& p : out.probes) {
      const bool violated = (p.lambda < lambda && p.residual > residual + slack) ||
                            (p.lambda > lambda && p.residual < residual - slack);
      if (violated) {
        throw Error("calibrate_lambda: residual not monotone in lambda: lambda " + std::to_string(p.lambda) +
                    " -> " + std::to_string(p.residual) + ", lambda " + std::to_string(lambda) + " -> " +
                    std::to_string(residual) + " (increase the per-probe budget)");
      }
    }
    out.probes.push_back({lambda, residual});
    solutions.push_back(std::move(sol));
    return residual;
  };
  auto accept = [&](double lambda, double residual) {
    out.lambda = lambda;
    out.residual = residual;
    out.solution = solutions.back();
    return out;
  };
  auto close_enough = [&](double r) { return std::abs(r - target_residual) <= options.tol_rel * target_residual; };

  double lam = options.lambda_init;
  double r = probe(lam);
  if (close_enough(r)) return accept(lam, r);

  constexpr int kMaxExpansions = 30;
  double lo = lam, hi = lam;
  if (r < target_residual) {
    int k = 0;
    while (r < target_residual) {
      lo = lam;
      if (++k > kMaxExpansions) {
        throw BracketError("calibrate_lambda: target " + std::to_string(target_residual) +
                               " above the largest reachable residual " + std::to_string(r),
                           out.probes.front().residual, r);
      }
      lam *= 10.0;
      r = probe(lam);
      if (close_enough(r)) return accept(lam, r);
    }
    hi = lam;
  } else {
    int k = 0;
    while (r > target_residual) {
      hi = lam;
      if (++k > kMaxExpansions) {
        throw BracketError("calibrate_lambda: target " + std::to_string(target_residual) +
                               " below the smallest reachable residual " + std::to_string(r),
                           r, out.probes.front().residual);
      }
      lam /= 10.0;
      r = probe(lam);
      if (close_enough(r)) return accept(lam, r);
    }
    lo = lam;
  }

  while (true) {
    lam = std::sqrt(lo * hi);
    r = probe(lam);
    if (close_enough(r)) return accept(lam, r);
    (r < target_residual ? lo : hi) = lam;
  }
}

}  // namespace nsp
