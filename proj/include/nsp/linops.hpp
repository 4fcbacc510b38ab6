#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace nsp {

using Vec = Eigen::VectorXd;

// Partition of an operator's output into consecutive blocks. Dual variables and
// penalties are evaluated block by block (a 2D gradient has blocks of size 2,
// a group selector one block per group).
class BlockLayout {
 public:
  BlockLayout() = default;

  static BlockLayout uniform(std::size_t total, std::size_t block_dim);
  static BlockLayout from_sizes(std::span<const std::size_t> sizes);

  std::size_t total() const { return offsets_.empty() ? 0 : offsets_.back(); }
  std::size_t block_count() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t block_begin(std::size_t b) const { return offsets_[b]; }
  std::size_t block_size(std::size_t b) const { return offsets_[b + 1] - offsets_[b]; }
  // Common block size, or 0 if blocks differ in size.
  std::size_t uniform_dim() const { return uniform_dim_; }
  std::span<const std::size_t> offsets() const { return offsets_; }

  bool operator==(const BlockLayout& other) const { return offsets_ == other.offsets_; }

 private:
  std::vector<std::size_t> offsets_{0};
  std::size_t uniform_dim_ = 1;
};

enum class OpKind { dense, sparse, gradient_1d, gradient_2d, group_selector, identity, scaled };

const char* to_string(OpKind kind);

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

struct Shape1D {
  std::size_t n;
};
struct Shape2D {
  std::size_t rows;
  std::size_t cols;
};
using GridShape = std::variant<Shape1D, Shape2D>;

std::size_t pixel_count(const GridShape& shape);

struct NormEstimate {
  double value = 0.0;         // inflated upper bound on ||op||^2
  double rayleigh = 0.0;      // raw power-iteration estimate
  std::size_t iterations = 0;
  bool converged = false;
};

class LinearOp;

// Power iteration on op^T op from a fixed-seed start vector. The Rayleigh
// quotient never exceeds the true ||op||^2, so it is multiplied by 1.01 to
// serve as an upper bound for the step-size conditions.
NormEstimate norm_sq_estimate(const LinearOp& op, double tol = 1e-6, std::size_t max_iter = 500);

inline constexpr double kNormSafetyFactor = 1.01;

// Immutable linear map with adjoint. Cheap to copy (shared state).
class LinearOp {
 public:
  struct Impl;

  OpKind kind() const;
  std::size_t in_dim() const;
  std::size_t out_dim() const;
  const BlockLayout& blocks() const;
  // Uniform block dimension, 0 when blocks vary (group selectors).
  std::size_t block_dim() const { return blocks().uniform_dim(); }

  Vec apply(const Vec& x) const;
  Vec adjoint_apply(const Vec& w) const;
  void apply_into(std::span<const double> x, std::span<double> y) const;
  void adjoint_into(std::span<const double> w, std::span<double> x) const;

  // norm_sq_estimate(*this).value, computed on first use and cached.
  double norm_sq_bound() const;

  // Same map, different output blocking.
  LinearOp with_blocks(BlockLayout layout) const;

  // Construction data, for serialization. Each accessor throws unless kind() matches.
  std::span<const double> dense_entries() const;      // dense: row-major
  std::vector<Triplet> sparse_triplets() const;        // sparse
  const std::vector<std::vector<std::size_t>>& groups() const;  // group_selector
  GridShape grid_shape() const;                        // gradient_1d / gradient_2d
  const LinearOp& scaled_inner() const;                // scaled
  double scaled_factor() const;                        // scaled

  explicit LinearOp(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

 private:
  std::shared_ptr<const Impl> impl_;
};

LinearOp make_identity(std::size_t n);
LinearOp make_dense(std::size_t rows, std::size_t cols, std::span<const double> row_major);
LinearOp make_dense(const Eigen::MatrixXd& m);
LinearOp make_sparse(std::size_t rows, std::size_t cols, std::span<const Triplet> triplets);
// Forward differences; trailing boundary differences are zero (Neumann).
LinearOp make_gradient(const GridShape& shape);
// One output row per (group, member) pair holding a single 1; one block per group.
LinearOp make_group_selector(const std::vector<std::vector<std::size_t>>& groups,
                             std::size_t in_dim);
LinearOp make_scaled(const LinearOp& inner, double factor);

// Column-by-column materialization; meant for small operators in diagnostics.
Eigen::MatrixXd to_dense(const LinearOp& op);

}  // namespace nsp
