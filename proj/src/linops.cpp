#include "nsp/linops.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <string>

#include "nsp/error.hpp"
#include "nsp/kernels.hpp"

namespace nsp {

BlockLayout BlockLayout::uniform(std::size_t total, std::size_t block_dim) {
  if (block_dim == 0 || total % block_dim != 0) {
    throw InvalidArgument("block layout: output size " + std::to_string(total) +
                          " is not a multiple of block dimension " + std::to_string(block_dim));
  }
  BlockLayout layout;
  layout.offsets_.resize(total / block_dim + 1);
  for (std::size_t b = 0; b < layout.offsets_.size(); ++b) layout.offsets_[b] = b * block_dim;
  layout.uniform_dim_ = block_dim;
  return layout;
}

BlockLayout BlockLayout::from_sizes(std::span<const std::size_t> sizes) {
  BlockLayout layout;
  layout.offsets_.assign(1, 0);
  layout.uniform_dim_ = sizes.empty() ? 1 : sizes.front();
  for (std::size_t s : sizes) {
    if (s == 0) throw InvalidArgument("block layout: empty block");
    layout.offsets_.push_back(layout.offsets_.back() + s);
    if (s != layout.uniform_dim_) layout.uniform_dim_ = 0;
  }
  return layout;
}

const char* to_string(OpKind kind) {
  switch (kind) {
    case OpKind::dense: return "dense";
    case OpKind::sparse: return "sparse";
    case OpKind::gradient_1d: return "gradient-1d";
    case OpKind::gradient_2d: return "gradient-2d";
    case OpKind::group_selector: return "group-selector";
    case OpKind::identity: return "identity";
    case OpKind::scaled: return "scaled";
  }
  return "unknown";
}

std::size_t pixel_count(const GridShape& shape) {
  return std::visit(
      [](const auto& s) -> std::size_t {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, Shape1D>) {
          return s.n;
        } else {
          return s.rows * s.cols;
        }
      },
      shape);
}

namespace {

struct Csr {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col;
  std::vector<double> val;

  kernels::CsrView view() const { return {rows, cols, row_ptr, col, val}; }
};

// Triplets sorted by (row, col) with duplicates summed.
Csr build_csr(std::size_t rows, std::size_t cols, std::vector<Triplet> t) {
  std::stable_sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  Csr m;
  m.rows = rows;
  m.cols = cols;
  m.row_ptr.assign(rows + 1, 0);
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (!m.col.empty() && k > 0 && t[k].row == t[k - 1].row && t[k].col == t[k - 1].col) {
      m.val.back() += t[k].value;
      continue;
    }
    m.col.push_back(t[k].col);
    m.val.push_back(t[k].value);
    ++m.row_ptr[t[k].row + 1];
  }
  std::partial_sum(m.row_ptr.begin(), m.row_ptr.end(), m.row_ptr.begin());
  return m;
}

std::vector<Triplet> transpose(const std::vector<Triplet>& t) {
  std::vector<Triplet> out;
  out.reserve(t.size());
  for (const auto& e : t) out.push_back({e.col, e.row, e.value});
  return out;
}

struct DenseData {
  std::vector<double> forward;  // rows x cols
  std::vector<double> adjoint;  // cols x rows
};

struct SparseData {
  std::vector<Triplet> triplets;
  Csr forward;
  Csr adjoint;
};

struct GroupData {
  std::vector<std::vector<std::size_t>> groups;
  Csr forward;
  Csr adjoint;
};

struct GradientData {
  GridShape shape;
};

struct IdentityData {};

struct ScaledData {
  LinearOp inner;
  double factor;
};

}  // namespace

struct LinearOp::Impl {
  OpKind kind;
  std::size_t in_dim;
  std::size_t out_dim;
  BlockLayout layout;
  std::variant<DenseData, SparseData, GroupData, GradientData, IdentityData, ScaledData> data;

  mutable std::once_flag norm_once;
  mutable double norm_bound = 0.0;

  Impl(OpKind k, std::size_t in, std::size_t out, BlockLayout l, decltype(data) d)
      : kind(k), in_dim(in), out_dim(out), layout(std::move(l)), data(std::move(d)) {}
};

OpKind LinearOp::kind() const { return impl_->kind; }
std::size_t LinearOp::in_dim() const { return impl_->in_dim; }
std::size_t LinearOp::out_dim() const { return impl_->out_dim; }
const BlockLayout& LinearOp::blocks() const { return impl_->layout; }

void LinearOp::apply_into(std::span<const double> x, std::span<double> y) const {
  check_size("apply: input", impl_->in_dim, x.size());
  check_size("apply: output", impl_->out_dim, y.size());
  const Impl& im = *impl_;
  switch (im.kind) {
    case OpKind::dense: {
      const auto& d = std::get<DenseData>(im.data);
      kernels::dense_matvec(im.out_dim, im.in_dim, d.forward, x, y);
      break;
    }
    case OpKind::sparse:
      kernels::csr_matvec(std::get<SparseData>(im.data).forward.view(), x, y);
      break;
    case OpKind::group_selector:
      kernels::csr_matvec(std::get<GroupData>(im.data).forward.view(), x, y);
      break;
    case OpKind::gradient_1d:
      kernels::gradient_1d(x, y);
      break;
    case OpKind::gradient_2d: {
      const auto s = std::get<Shape2D>(std::get<GradientData>(im.data).shape);
      kernels::gradient_2d(s.rows, s.cols, x, y);
      break;
    }
    case OpKind::identity:
      std::copy(x.begin(), x.end(), y.begin());
      break;
    case OpKind::scaled: {
      const auto& s = std::get<ScaledData>(im.data);
      s.inner.apply_into(x, y);
      kernels::scale(s.factor, y, y);
      break;
    }
  }
}

void LinearOp::adjoint_into(std::span<const double> w, std::span<double> x) const {
  check_size("adjoint_apply: input", impl_->out_dim, w.size());
  check_size("adjoint_apply: output", impl_->in_dim, x.size());
  const Impl& im = *impl_;
  switch (im.kind) {
    case OpKind::dense: {
      const auto& d = std::get<DenseData>(im.data);
      kernels::dense_matvec(im.in_dim, im.out_dim, d.adjoint, w, x);
      break;
    }
    case OpKind::sparse:
      kernels::csr_matvec(std::get<SparseData>(im.data).adjoint.view(), w, x);
      break;
    case OpKind::group_selector:
      kernels::csr_matvec(std::get<GroupData>(im.data).adjoint.view(), w, x);
      break;
    case OpKind::gradient_1d:
      kernels::gradient_1d_adjoint(w, x);
      break;
    case OpKind::gradient_2d: {
      const auto s = std::get<Shape2D>(std::get<GradientData>(im.data).shape);
      kernels::gradient_2d_adjoint(s.rows, s.cols, w, x);
      break;
    }
    case OpKind::identity:
      std::copy(w.begin(), w.end(), x.begin());
      break;
    case OpKind::scaled: {
      const auto& s = std::get<ScaledData>(im.data);
      s.inner.adjoint_into(w, x);
      kernels::scale(s.factor, x, x);
      break;
    }
  }
}

Vec LinearOp::apply(const Vec& x) const {
  check_size("apply: input", impl_->in_dim, static_cast<std::size_t>(x.size()));
  Vec y(impl_->out_dim);
  apply_into({x.data(), static_cast<std::size_t>(x.size())}, {y.data(), impl_->out_dim});
  return y;
}

Vec LinearOp::adjoint_apply(const Vec& w) const {
  check_size("adjoint_apply: input", impl_->out_dim, static_cast<std::size_t>(w.size()));
  Vec x(impl_->in_dim);
  adjoint_into({w.data(), static_cast<std::size_t>(w.size())}, {x.data(), impl_->in_dim});
  return x;
}

double LinearOp::norm_sq_bound() const {
  std::call_once(impl_->norm_once, [this] { impl_->norm_bound = norm_sq_estimate(*this).value; });
  return impl_->norm_bound;
}

LinearOp LinearOp::with_blocks(BlockLayout layout) const {
  check_size("with_blocks: layout total", impl_->out_dim, layout.total());
  return LinearOp(std::make_shared<const Impl>(impl_->kind, impl_->in_dim, impl_->out_dim,
                                               std::move(layout), impl_->data));
}

namespace {
[[noreturn]] void wrong_kind(const char* accessor, OpKind kind) {
  throw InvalidArgument(std::string(accessor) + ": not available for " + to_string(kind) +
                        " operator");
}
}  // namespace

std::span<const double> LinearOp::dense_entries() const {
  if (kind() != OpKind::dense) wrong_kind("dense_entries", kind());
  return std::get<DenseData>(impl_->data).forward;
}

std::vector<Triplet> LinearOp::sparse_triplets() const {
  if (kind() != OpKind::sparse) wrong_kind("sparse_triplets", kind());
  const Csr& m = std::get<SparseData>(impl_->data).forward;
  std::vector<Triplet> out;
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) out.push_back({i, m.col[k], m.val[k]});
  }
  return out;
}

const std::vector<std::vector<std::size_t>>& LinearOp::groups() const {
  if (kind() != OpKind::group_selector) wrong_kind("groups", kind());
  return std::get<GroupData>(impl_->data).groups;
}

GridShape LinearOp::grid_shape() const {
  if (kind() != OpKind::gradient_1d && kind() != OpKind::gradient_2d) wrong_kind("grid_shape", kind());
  return std::get<GradientData>(impl_->data).shape;
}

const LinearOp& LinearOp::scaled_inner() const {
  if (kind() != OpKind::scaled) wrong_kind("scaled_inner", kind());
  return std::get<ScaledData>(impl_->data).inner;
}

double LinearOp::scaled_factor() const {
  if (kind() != OpKind::scaled) wrong_kind("scaled_factor", kind());
  return std::get<ScaledData>(impl_->data).factor;
}

NormEstimate norm_sq_estimate(const LinearOp& op, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw InvalidArgument("norm_sq_estimate: tol must be positive");
  if (max_iter < 1) throw InvalidArgument("norm_sq_estimate: max_iter must be >= 1");

  std::mt19937_64 rng(0x5eed'0f'a11ULL);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vec v(op.in_dim());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = unif(rng);
  v.normalize();

  NormEstimate est;
  double previous = 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const Vec u = op.adjoint_apply(op.apply(v));
    const double rq = v.dot(u);
    const double norm_u = u.norm();
    est.iterations = it;
    est.rayleigh = rq;
    if (norm_u == 0.0) {
      est.converged = true;
      break;
    }
    if (it > 1 && std::abs(rq - previous) <= tol * rq) {
      est.converged = true;
      break;
    }
    previous = rq;
    v = u / norm_u;
  }
  est.value = kNormSafetyFactor * est.rayleigh;
  return est;
}

LinearOp make_identity(std::size_t n) {
  if (n == 0) throw InvalidArgument("identity: dimension must be positive");
  return LinearOp(std::make_shared<const LinearOp::Impl>(OpKind::identity, n, n,
                                                         BlockLayout::uniform(n, 1), IdentityData{}));
}

LinearOp make_dense(std::size_t rows, std::size_t cols, std::span<const double> row_major) {
  if (rows == 0 || cols == 0) throw InvalidArgument("dense: dimensions must be positive");
  check_size("dense: entry count", rows * cols, row_major.size());
  DenseData d;
  d.forward.assign(row_major.begin(), row_major.end());
  d.adjoint.resize(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) d.adjoint[j * rows + i] = row_major[i * cols + j];
  }
  for (double v : d.forward) {
    if (!std::isfinite(v)) throw InvalidArgument("dense: non-finite entry");
  }
  return LinearOp(std::make_shared<const LinearOp::Impl>(OpKind::dense, cols, rows,
                                                         BlockLayout::uniform(rows, 1), std::move(d)));
}

LinearOp make_dense(const Eigen::MatrixXd& m) {
  std::vector<double> entries(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) entries[static_cast<std::size_t>(i * m.cols() + j)] = m(i, j);
  }
  return make_dense(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()), entries);
}

LinearOp make_sparse(std::size_t rows, std::size_t cols, std::span<const Triplet> triplets) {
  if (rows == 0 || cols == 0) throw InvalidArgument("sparse: dimensions must be positive");
  for (const auto& t : triplets) {
    if (t.row >= rows || t.col >= cols) {
      throw InvalidArgument("sparse: triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                            ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!std::isfinite(t.value)) throw InvalidArgument("sparse: non-finite value");
  }
  SparseData d;
  d.triplets.assign(triplets.begin(), triplets.end());
  d.forward = build_csr(rows, cols, d.triplets);
  d.adjoint = build_csr(cols, rows, transpose(d.triplets));
  return LinearOp(std::make_shared<const LinearOp::Impl>(OpKind::sparse, cols, rows,
                                                         BlockLayout::uniform(rows, 1), std::move(d)));
}

LinearOp make_gradient(const GridShape& shape) {
  if (const auto* s = std::get_if<Shape1D>(&shape)) {
    if (s->n < 2) throw InvalidArgument("gradient: length must be >= 2, got " + std::to_string(s->n));
    return LinearOp(std::make_shared<const LinearOp::Impl>(
        OpKind::gradient_1d, s->n, s->n - 1, BlockLayout::uniform(s->n - 1, 1), GradientData{shape}));
  }
  const auto s = std::get<Shape2D>(shape);
  if (s.rows < 2 || s.cols < 2) {
    throw InvalidArgument("gradient: image dimensions must be >= 2, got " + std::to_string(s.rows) +
                          "x" + std::to_string(s.cols));
  }
  const std::size_t n = s.rows * s.cols;
  return LinearOp(std::make_shared<const LinearOp::Impl>(
      OpKind::gradient_2d, n, 2 * n, BlockLayout::uniform(2 * n, 2), GradientData{shape}));
}

LinearOp make_group_selector(const std::vector<std::vector<std::size_t>>& groups, std::size_t in_dim) {
  if (in_dim == 0) throw InvalidArgument("group selector: in_dim must be positive");
  if (groups.empty()) throw InvalidArgument("group selector: no groups");
  std::vector<Triplet> t;
  std::vector<std::size_t> sizes;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].empty()) throw InvalidArgument("group selector: group " + std::to_string(g) + " is empty");
    for (std::size_t idx : groups[g]) {
      if (idx >= in_dim) {
        throw InvalidArgument("group selector: index " + std::to_string(idx) + " in group " +
                              std::to_string(g) + " is out of range for in_dim " + std::to_string(in_dim));
      }
      t.push_back({t.size(), idx, 1.0});
    }
    sizes.push_back(groups[g].size());
  }
  const std::size_t rows = t.size();
  GroupData d;
  d.groups = groups;
  d.forward = build_csr(rows, in_dim, t);
  d.adjoint = build_csr(in_dim, rows, transpose(t));
  return LinearOp(std::make_shared<const LinearOp::Impl>(OpKind::group_selector, in_dim, rows,
                                                         BlockLayout::from_sizes(sizes), std::move(d)));
}

LinearOp make_scaled(const LinearOp& inner, double factor) {
  if (!std::isfinite(factor)) throw InvalidArgument("scaled: non-finite factor");
  return LinearOp(std::make_shared<const LinearOp::Impl>(OpKind::scaled, inner.in_dim(), inner.out_dim(),
                                                         inner.blocks(), ScaledData{inner, factor}));
}

Eigen::MatrixXd to_dense(const LinearOp& op) {
  Eigen::MatrixXd m(op.out_dim(), op.in_dim());
  Vec e = Vec::Zero(op.in_dim());
  for (std::size_t j = 0; j < op.in_dim(); ++j) {
    e[j] = 1.0;
    m.col(j) = op.apply(e);
    e[j] = 0.0;
  }
  return m;
}

}  // namespace nsp
