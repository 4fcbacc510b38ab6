#include "nsp/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace nsp::kernels {

void l1_ball_project(std::span<const double> in, double radius, std::span<double> out) {
  double l1 = 0.0;
  for (double v : in) l1 += std::abs(v);
  if (l1 <= radius * (1.0 + kBallSlack)) {
    std::copy(in.begin(), in.end(), out.begin());
    return;
  }
  std::vector<double> mu(in.size());
  std::transform(in.begin(), in.end(), mu.begin(), [](double v) { return std::abs(v); });
  std::sort(mu.begin(), mu.end(), std::greater<>());

  // theta = (sum of the rho largest magnitudes - radius) / rho, rho the last
  // index whose magnitude stays above the running threshold.
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    cumsum += mu[j];
    const double t = (cumsum - radius) / static_cast<double>(j + 1);
    if (mu[j] - t > 0.0) {
      theta = t;
    } else {
      break;
    }
  }
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double shrunk = std::max(std::abs(in[i]) - theta, 0.0);
    out[i] = std::copysign(shrunk, in[i]);
  }

  // cumsum - radius cancels badly when the magnitudes dwarf the radius, which
  // can leave the result outside the slack. Shrinking the survivors by the
  // (now tiny, accurately computed) excess puts it back inside, so projecting
  // the output again returns it unchanged.
  for (int pass = 0; pass < 4; ++pass) {
    double sum = 0.0;
    std::size_t support = 0;
    for (double v : out) {
      sum += std::abs(v);
      support += v != 0.0;
    }
    if (sum <= radius * (1.0 + kBallSlack) || support == 0) break;
    const double excess = (sum - radius) / static_cast<double>(support);
    for (double& v : out) {
      if (v != 0.0) v = std::copysign(std::max(std::abs(v) - excess, 0.0), v);
    }
  }
}

namespace serial {

void dense_matvec(std::size_t rows, std::size_t cols, std::span<const double> m,
                  std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < rows; ++i) {
    const double* row = m.data() + i * cols;
    double acc = 0.0;
    for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void csr_matvec(const CsrView& m, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < m.rows; ++i) {
    double acc = 0.0;
    for (std::size_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) acc += m.val[k] * x[m.col[k]];
    y[i] = acc;
  }
}

void gradient_1d(std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i + 1 < x.size(); ++i) y[i] = x[i + 1] - x[i];
}

void gradient_1d_adjoint(std::span<const double> w, std::span<double> x) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double left = i > 0 ? w[i - 1] : 0.0;
    const double right = i + 1 < n ? w[i] : 0.0;
    x[i] = left - right;
  }
}

void gradient_2d(std::size_t rows, std::size_t cols, std::span<const double> x,
                 std::span<double> y) {
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t p = i * cols + j;
      y[2 * p] = j + 1 < cols ? x[p + 1] - x[p] : 0.0;
      y[2 * p + 1] = i + 1 < rows ? x[p + cols] - x[p] : 0.0;
    }
  }
}

void gradient_2d_adjoint(std::size_t rows, std::size_t cols, std::span<const double> w,
                         std::span<double> x) {
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t p = i * cols + j;
      double acc = 0.0;
      if (j + 1 < cols) acc -= w[2 * p];
      if (j > 0) acc += w[2 * (p - 1)];
      if (i + 1 < rows) acc -= w[2 * p + 1];
      if (i > 0) acc += w[2 * (p - cols) + 1];
      x[p] = acc;
    }
  }
}

void scale(double c, std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = c * in[i];
}

void project_blocks_l2(std::span<const std::size_t> offsets, double radius,
                       std::span<const double> u, std::span<double> out) {
  for (std::size_t b = 0; b + 1 < offsets.size(); ++b) {
    double sq = 0.0;
    for (std::size_t k = offsets[b]; k < offsets[b + 1]; ++k) sq += u[k] * u[k];
    const double norm = std::sqrt(sq);
    const double f = norm > radius * (1.0 + kBallSlack) ? radius / norm : 1.0;
    for (std::size_t k = offsets[b]; k < offsets[b + 1]; ++k) out[k] = f * u[k];
  }
}

void project_box(double radius, std::span<const double> u, std::span<double> out) {
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = std::clamp(u[i], -radius, radius);
}

void project_blocks_l1(std::span<const std::size_t> offsets, double radius,
                       std::span<const double> u, std::span<double> out) {
  for (std::size_t b = 0; b + 1 < offsets.size(); ++b) {
    const std::size_t lo = offsets[b];
    const std::size_t len = offsets[b + 1] - lo;
    l1_ball_project(u.subspan(lo, len), radius, out.subspan(lo, len));
  }
}

}  // namespace serial
}  // namespace nsp::kernels
