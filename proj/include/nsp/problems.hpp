#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "nsp/solver.hpp"

namespace nsp {

// 1/2 ||x - g||^2 + lambda * TV(x): K = identity, A = gradient over `shape`.
Problem make_tv_denoise(const Vec& g, double lambda, const GridShape& shape);

// Least squares with (possibly overlapping) Euclidean group penalty,
// A = make_group_selector(groups, K.in_dim()).
Problem make_group_sparsity(const LinearOp& K, const Vec& y,
                            const std::vector<std::vector<std::size_t>>& groups, double lambda);

// Ray from (x0, y0) to (x1, y1); x runs along columns, y along rows, and cell
// (i, j) covers [j, j+1] x [i, i+1].
struct RaySegment {
  double x0, y0, x1, y1;
};

// Synthetic straight-ray tomography on a rows x cols grid of unit cells.
struct TomographyData {
  Shape2D shape{};
  LinearOp K;       // n_rays x (rows*cols) exact chord-length matrix
  LinearOp A;       // 2D gradient
  Vec x_in;         // ground truth
  Vec clean;        // K x_in
  Vec y;            // clean + noise
  double noise_norm = 0.0;
  std::vector<double> ray_lengths;  // total chord length of each ray
  std::vector<RaySegment> rays;

  Problem with_lambda(double lambda) const;
};

// Rays join two uniformly drawn points on different sides of the image
// boundary; noise is gaussian rescaled so ||y - K x_in|| = noise_frac ||K x_in||.
// Bitwise reproducible for a given seed.
TomographyData make_tv_tomography(const Shape2D& shape, const Vec& x_in, std::size_t n_rays,
                                  double noise_frac, std::uint64_t seed);

// Zones of constant value (background, a bright rectangle, a dark disc, a
// mid-level wedge) on a rows x cols grid, row-major.
Vec piecewise_constant_phantom(const Shape2D& shape);

// Random matrices for benchmark and test problem families.
Eigen::MatrixXd gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);
// Sparse n x n matrix with a single +-1 per row and column.
LinearOp signed_permutation(std::size_t n, std::uint64_t seed);

struct CalibrationOptions {
  double tol_rel = 1e-2;       // |residual - target| <= tol_rel * target
  double lambda_init = 1.0;
  std::size_t max_probes = 80;
  std::size_t max_iter = 20000;  // per probe
  double fp_tol = 1e-9;          // per probe
  double margin = 0.495;
  // Residual decreasing in lambda by more than this (relative to target)
  // between probes aborts the calibration.
  double monotone_slack_rel = 1e-4;
};

struct CalibrationProbe {
  double lambda;
  double residual;
};

struct CalibrationResult {
  double lambda = 0.0;
  double residual = 0.0;
  SolverResult solution;
  std::vector<CalibrationProbe> probes;  // in evaluation order
};

// Finds lambda with ||K x_lambda - y|| = target_residual by bracketing and
// bisecting log(lambda), one solve per probe. Throws BracketError when the
// target lies outside the residual range reachable by the probes.
CalibrationResult calibrate_lambda(const std::function<Problem(double)>& make_problem,
                                   double target_residual, const CalibrationOptions& options = {});

}  // namespace nsp
