#pragma once

// Inner loops behind the linear operators and the dual projections.
//
// Every kernel exists twice: a plain serial loop kept as the reference, and an
// OpenMP version that splits the output index range across threads. Each output
// element is produced by exactly one thread with the same operation order as
// the serial loop, so the two variants agree bitwise for any thread count.

#include <cstddef>
#include <limits>
#include <span>

namespace nsp::kernels {

// Compressed sparse row storage; row_ptr has rows + 1 entries.
struct CsrView {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::span<const std::size_t> row_ptr;
  std::span<const std::size_t> col;
  std::span<const double> val;
};

// Points whose norm exceeds the radius by at most this relative amount count
// as inside the ball. A projected point lands on the sphere only up to
// rounding, so without the slack projecting it again would move it by an ulp.
inline constexpr double kBallSlack = 8 * std::numeric_limits<double>::epsilon();

// Euclidean projection of one block onto {z : sum |z_i| <= radius}.
// Sort-based, O(d log d). `out` may alias `in`.
void l1_ball_project(std::span<const double> in, double radius, std::span<double> out);

namespace serial {

// y = M x, M row-major rows x cols.
void dense_matvec(std::size_t rows, std::size_t cols, std::span<const double> m,
                  std::span<const double> x, std::span<double> y);
void csr_matvec(const CsrView& m, std::span<const double> x, std::span<double> y);

// Forward differences, y has n - 1 entries.
void gradient_1d(std::span<const double> x, std::span<double> y);
void gradient_1d_adjoint(std::span<const double> w, std::span<double> x);

// Image stored row-major; output block per pixel is (d/dcol, d/drow) with zero
// differences on the last column / last row.
void gradient_2d(std::size_t rows, std::size_t cols, std::span<const double> x,
                 std::span<double> y);
void gradient_2d_adjoint(std::size_t rows, std::size_t cols, std::span<const double> w,
                         std::span<double> x);

// out = c * in
void scale(double c, std::span<const double> in, std::span<double> out);

// Per-block projections; offsets has nblocks + 1 entries.
void project_blocks_l2(std::span<const std::size_t> offsets, double radius,
                       std::span<const double> u, std::span<double> out);
void project_box(double radius, std::span<const double> u, std::span<double> out);
void project_blocks_l1(std::span<const std::size_t> offsets, double radius,
                       std::span<const double> u, std::span<double> out);

}  // namespace serial

namespace parallel {

void dense_matvec(std::size_t rows, std::size_t cols, std::span<const double> m,
                  std::span<const double> x, std::span<double> y);
void csr_matvec(const CsrView& m, std::span<const double> x, std::span<double> y);
void gradient_1d(std::span<const double> x, std::span<double> y);
void gradient_1d_adjoint(std::span<const double> w, std::span<double> x);
void gradient_2d(std::size_t rows, std::size_t cols, std::span<const double> x,
                 std::span<double> y);
void gradient_2d_adjoint(std::size_t rows, std::size_t cols, std::span<const double> w,
                         std::span<double> x);
void scale(double c, std::span<const double> in, std::span<double> out);
void project_blocks_l2(std::span<const std::size_t> offsets, double radius,
                       std::span<const double> u, std::span<double> out);
void project_box(double radius, std::span<const double> u, std::span<double> out);
void project_blocks_l1(std::span<const std::size_t> offsets, double radius,
                       std::span<const double> u, std::span<double> out);

}  // namespace parallel

// Dispatch on thread_count(): serial when 1, OpenMP otherwise.
void dense_matvec(std::size_t rows, std::size_t cols, std::span<const double> m,
                  std::span<const double> x, std::span<double> y);
void csr_matvec(const CsrView& m, std::span<const double> x, std::span<double> y);
void gradient_1d(std::span<const double> x, std::span<double> y);
void gradient_1d_adjoint(std::span<const double> w, std::span<double> x);
void gradient_2d(std::size_t rows, std::size_t cols, std::span<const double> x,
                 std::span<double> y);
void gradient_2d_adjoint(std::size_t rows, std::size_t cols, std::span<const double> w,
                         std::span<double> x);
void scale(double c, std::span<const double> in, std::span<double> out);
void project_blocks_l2(std::span<const std::size_t> offsets, double radius,
                       std::span<const double> u, std::span<double> out);
void project_box(double radius, std::span<const double> u, std::span<double> out);
void project_blocks_l1(std::span<const std::size_t> offsets, double radius,
                       std::span<const double> u, std::span<double> out);

}  // namespace nsp::kernels
