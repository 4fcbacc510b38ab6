#pragma once

// Small seeded problems used by `nsp check`, `nsp bench` and the acceptance suite.

#include <cstdint>
#include <vector>

#include "nsp/problems.hpp"

namespace nsp::desk {

// Largest lambda worth trying: ||A K^T y||_inf in the penalty's dual norm.
double lambda_scale(const LinearOp& K, const LinearOp& A, const Vec& y, const Penalty& unit);

// Number of blocks of A x whose norm exceeds rel_tol * (1 + max block norm).
std::size_t active_blocks(const LinearOp& A, const Vec& x, double rel_tol = 1e-6);

// Random 20 x 30 gaussian K (unit spectral scale), A = gradient over 30 samples,
// y from a piecewise-constant signal plus 1% noise. Lambda is picked on a log
// grid so that about half of the 29 gradient blocks are active.
Problem tv_regression(std::uint64_t seed);

// 1D TV denoising of a noisy staircase with n samples.
Problem tv_denoise_1d(std::size_t n, std::uint64_t seed, double lambda = 0.5);

// Gaussian rows x cols matrix divided by its spectral norm times `norm`.
LinearOp scaled_gaussian(std::size_t rows, std::size_t cols, double norm, std::uint64_t seed);

// Iterates of the primal-dual solver and of the baseline it reduces to, from
// the same start (zero), for n = 0..iterations.
struct PairedRun {
  std::vector<Vec> lv_x, lv_w;
  std::vector<Vec> base_x, base_w;
  double tau = 0.0;
  double sigma = 0.0;
};

// A orthogonal, scalar blocks: the solver with sigma = 1 is ISTA on K A^T in
// z = A x. base_w is the dual implied by the ISTA step, (u - z^n) / tau with
// u = z^{n-1} + tau (K A^T)^T (y - K A^T z^{n-1}).
PairedRun ista_pair(const Problem& problem, double tau, std::size_t iterations);

// K orthogonal: the solver with tau = 1 is dual gradient projection on A with g = K^T y.
PairedRun gradient_projection_pair(const Problem& problem, double sigma, std::size_t iterations);

// max over n of max_i |a[n]_i - b[n]_i|.
double max_deviation(const std::vector<Vec>& a, const std::vector<Vec>& b);

}  // namespace nsp::desk
