#pragma once

// The two special cases the primal-dual iteration reduces to. They serve as
// per-iterate oracles for the solver and as baselines in `nsp bench`.

#include <optional>

#include "nsp/solver.hpp"

namespace nsp {

// Iterative soft-thresholding for 1/2 ||K x - y||^2 + lambda ||x||_1:
//   x^{n+1} = S_{tau lambda}(x^n + tau K^T(y - K x^n)),  tau ||K||^2 < 2.
// The result carries an empty w.
SolverResult ista_solve(const LinearOp& K, const Vec& y, double lambda, double tau,
                        std::size_t max_iter, const std::optional<Vec>& x0 = std::nullopt,
                        const IterationObserver& observer = {});

// Same, taking a Problem; rejects anything but A = identity with scalar blocks.
SolverResult ista_solve(const Problem& problem, double tau, std::size_t max_iter,
                        const std::optional<Vec>& x0 = std::nullopt,
                        const IterationObserver& observer = {});

// Dual gradient projection for 1/2 ||x - g||^2 + lambda ||A x||_1:
//   w^{n+1} = P_lambda(w^n + sigma A (g - A^T w^n)),  x^n = g - A^T w^n,
// with sigma ||A||^2 < 1 and Euclidean blocks from A's layout.
SolverResult gradient_projection_solve(const LinearOp& A, const Vec& g, double lambda, double sigma,
                                       std::size_t max_iter,
                                       const std::optional<Vec>& w0 = std::nullopt,
                                       const IterationObserver& observer = {});

// Same, taking a Problem; rejects anything but K = identity. Uses the
// problem's norm kind for the projection.
SolverResult gradient_projection_solve(const Problem& problem, double sigma, std::size_t max_iter,
                                       const std::optional<Vec>& w0 = std::nullopt,
                                       const IterationObserver& observer = {});

}  // namespace nsp
