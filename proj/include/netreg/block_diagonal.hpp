#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace netreg {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Square block-diagonal matrix D(A_1, ..., A_K) stored block by block.
///
/// All products and solves run block-wise, so cost scales with the sum of
/// squared block orders rather than with n^2.
class BlockDiagonal {
 public:
  BlockDiagonal() = default;
  explicit BlockDiagonal(std::vector<MatrixXd> blocks);

  static BlockDiagonal identity(std::span<const Index> sizes);
  static BlockDiagonal zeros(std::span<const Index> sizes);
  /// Extracts the diagonal blocks of a dense matrix; throws InputError if any
  /// off-block entry is nonzero.
  static BlockDiagonal from_dense(const MatrixXd& dense, std::span<const Index> sizes);

  Index size() const noexcept { return size_; }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  const MatrixXd& block(std::size_t r) const { return blocks_[r]; }
  MatrixXd& block(std::size_t r) { return blocks_[r]; }
  Index offset(std::size_t r) const { return offsets_[r]; }
  const std::vector<Index>& sizes() const noexcept { return sizes_; }

  MatrixXd dense() const;

  VectorXd apply(const VectorXd& v) const;
  MatrixXd apply(const MatrixXd& m) const;
  VectorXd apply_transpose(const VectorXd& v) const;

  /// Solves (this) x = b block-wise with partial-pivot LU. Throws
  /// NumericalError naming `what` when a block is numerically singular.
  VectorXd solve(const VectorXd& b, const char* what = "matrix") const;
  MatrixXd solve(const MatrixXd& b, const char* what = "matrix") const;

  BlockDiagonal operator*(const BlockDiagonal& rhs) const;
  BlockDiagonal transpose() const;
  /// I - c * this
  BlockDiagonal identity_minus(double c) const;

  double trace() const;
  double max_abs_asymmetry() const;
  /// Row-sum (infinity) norm.
  double row_sum_norm() const;

 private:
  void index_blocks();

  std::vector<MatrixXd> blocks_;
  std::vector<Index> sizes_;
  std::vector<Index> offsets_;
  Index size_ = 0;
};

}  // namespace netreg
