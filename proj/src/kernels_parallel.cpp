#include "nsp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <omp.h>

#include "nsp/parallel.hpp"

namespace nsp::kernels {
namespace parallel {
namespace {

// Below this many outputs the fork/join cost dominates.
constexpr std::int64_t kMinParallelWork = 2048;

bool worth_it(std::size_t n) { return static_cast<std::int64_t>(n) >= kMinParallelWork; }

}  // namespace

void dense_matvec(std::size_t rows, std::size_t cols, std::span<const double> m,
                  std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (worth_it(rows * cols))
  for (std::int64_t i = 0; i < n; ++i) {
    const double* row = m.data() + static_cast<std::size_t>(i) * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void csr_matvec(const CsrView& m, std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::int64_t>(m.rows);
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (worth_it(m.val.size()))
  for (std::int64_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) acc += m.val[k] * x[m.col[k]];
    y[i] = acc;
  }
}

void gradient_1d(std::span<const double> x, std::span<double> y) {
  const auto n = static_cast<std::int64_t>(x.size()) - 1;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (worth_it(x.size()))
  for (std::int64_t i = 0; i < n; ++i) y[i] = x[i + 1] - x[i];
}

void gradient_1d_adjoint(std::span<const double> w, std::span<double> x) {
  const auto n = static_cast<std::int64_t>(x.size());
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (worth_it(x.size()))
  for (std::int64_t i = 0; i < n; ++i) {
    const double left = i > 0 ? w[i - 1] : 0.0;
    const double right = i + 1 < n ? w[i] : 0.0;
    x[i] = left - right;
  }
}

void gradient_2d(std::size_t rows, std::size_t cols, std::span<const double> x,
                 std::span<double> y) {
  const auto nr = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (worth_it(rows * cols))
  for (std::int64_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t p = static_cast<std::size_t>(i) * cols + j;
      y[2 * p] = j + 1 < cols ? x[p + 1] - x[p] : 0.0;
      y[2 * p + 1] = i + 1 < nr ? x[p + cols] - x[p] : 0.0;
    }
  }
}

void gradient_2d_adjoint(std::size_t rows, std::size_t cols, std::span<const double> w,
                         std::span<double> x) {
  const auto nr = static_cast<std::int64_t>(rows);
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (worth_it(rows * cols))
  for (std::int64_t i = 0; i < nr; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t p = static_cast<std::size_t>(i) * cols + j;
      double acc = 0.0;
      if (j + 1 < cols) acc -= w[2 * p];
      if (j > 0) acc += w[2 * (p - 1)];
      if (i + 1 < nr) acc -= w[2 * p + 1];
      if (i > 0) acc += w[2 * (p - cols) + 1];
      x[p] = acc;
    }
  }
}

void scale(double c, std::span<const double> in, std::span<double> out) {
  const auto n = static_cast<std::int64_t>(in.size());
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (worth_it(in.size()))
  for (std::int64_t i = 0; i < n; ++i) out[i] = c * in[i];
}

void project_blocks_l2(std::span<const std::size_t> offsets, double radius,
                       std::span<const double> u, std::span<double> out) {
  const auto nb = static_cast<std::int64_t>(offsets.size()) - 1;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (worth_it(u.size()))
  for (std::int64_t b = 0; b < nb; ++b) {
    double sq = 0.0;
    for (std::size_t k = offsets[b]; k < offsets[b + 1]; ++k) sq += u[k] * u[k];
    const double norm = std::sqrt(sq);
    const double f = norm > radius * (1.0 + kBallSlack) ? radius / norm : 1.0;
    for (std::size_t k = offsets[b]; k < offsets[b + 1]; ++k) out[k] = f * u[k];
  }
}

void project_box(double radius, std::span<const double> u, std::span<double> out) {
  const auto n = static_cast<std::int64_t>(u.size());
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (worth_it(u.size()))
  for (std::int64_t i = 0; i < n; ++i) out[i] = std::clamp(u[i], -radius, radius);
}

void project_blocks_l1(std::span<const std::size_t> offsets, double radius,
                       std::span<const double> u, std::span<double> out) {
  const auto nb = static_cast<std::int64_t>(offsets.size()) - 1;
#pragma omp parallel for schedule(static) num_threads(thread_count()) if (worth_it(u.size()))
  for (std::int64_t b = 0; b < nb; ++b) {
    const std::size_t lo = offsets[b];
    const std::size_t len = offsets[b + 1] - lo;
    l1_ball_project(u.subspan(lo, len), radius, out.subspan(lo, len));
  }
}

}  // namespace parallel

namespace {
bool use_serial() { return thread_count() <= 1; }
}  // namespace

void dense_matvec(std::size_t rows, std::size_t cols, std::span<const double> m,
                  std::span<const double> x, std::span<double> y) {
  use_serial() ? serial::dense_matvec(rows, cols, m, x, y)
               : parallel::dense_matvec(rows, cols, m, x, y);
}
void csr_matvec(const CsrView& m, std::span<const double> x, std::span<double> y) {
  use_serial() ? serial::csr_matvec(m, x, y) : parallel::csr_matvec(m, x, y);
}
void gradient_1d(std::span<const double> x, std::span<double> y) {
  use_serial() ? serial::gradient_1d(x, y) : parallel::gradient_1d(x, y);
}
void gradient_1d_adjoint(std::span<const double> w, std::span<double> x) {
  use_serial() ? serial::gradient_1d_adjoint(w, x) : parallel::gradient_1d_adjoint(w, x);
}
void gradient_2d(std::size_t rows, std::size_t cols, std::span<const double> x,
                 std::span<double> y) {
  use_serial() ? serial::gradient_2d(rows, cols, x, y) : parallel::gradient_2d(rows, cols, x, y);
}
void gradient_2d_adjoint(std::size_t rows, std::size_t cols, std::span<const double> w,
                         std::span<double> x) {
  use_serial() ? serial::gradient_2d_adjoint(rows, cols, w, x)
               : parallel::gradient_2d_adjoint(rows, cols, w, x);
}
void scale(double c, std::span<const double> in, std::span<double> out) {
  use_serial() ? serial::scale(c, in, out) : parallel::scale(c, in, out);
}
void project_blocks_l2(std::span<const std::size_t> offsets, double radius,
                       std::span<const double> u, std::span<double> out) {
  use_serial() ? serial::project_blocks_l2(offsets, radius, u, out)
               : parallel::project_blocks_l2(offsets, radius, u, out);
}
void project_box(double radius, std::span<const double> u, std::span<double> out) {
  use_serial() ? serial::project_box(radius, u, out) : parallel::project_box(radius, u, out);
}
void project_blocks_l1(std::span<const std::size_t> offsets, double radius,
                       std::span<const double> u, std::span<double> out) {
  use_serial() ? serial::project_blocks_l1(offsets, radius, u, out)
               : parallel::project_blocks_l1(offsets, radius, u, out);
}

}  // namespace nsp::kernels
