#include "netreg/block_diagonal.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "netreg/errors.hpp"

namespace netreg {

BlockDiagonal::BlockDiagonal(std::vector<MatrixXd> blocks) : blocks_(std::move(blocks)) {
  for (std::size_t r = 0; r < blocks_.size(); ++r) {
    if (blocks_[r].rows() != blocks_[r].cols()) {
      throw InputError("block " + std::to_string(r) + " is not square (" +
                       std::to_string(blocks_[r].rows()) + "x" +
                       std::to_string(blocks_[r].cols()) + ")");
    }
  }
  index_blocks();
}

void BlockDiagonal::index_blocks() {
  sizes_.clear();
  offsets_.clear();
  size_ = 0;
  for (const auto& b : blocks_) {
    offsets_.push_back(size_);
    sizes_.push_back(b.rows());
    size_ += b.rows();
  }
}

BlockDiagonal BlockDiagonal::identity(std::span<const Index> sizes) {
  std::vector<MatrixXd> blocks;
  blocks.reserve(sizes.size());
  for (Index m : sizes) blocks.push_back(MatrixXd::Identity(m, m));
  return BlockDiagonal(std::move(blocks));
}

BlockDiagonal BlockDiagonal::zeros(std::span<const Index> sizes) {
  std::vector<MatrixXd> blocks;
  blocks.reserve(sizes.size());
  for (Index m : sizes) blocks.push_back(MatrixXd::Zero(m, m));
  return BlockDiagonal(std::move(blocks));
}

BlockDiagonal BlockDiagonal::from_dense(const MatrixXd& dense, std::span<const Index> sizes) {
  Index n = 0;
  for (Index m : sizes) n += m;
  if (dense.rows() != n || dense.cols() != n) {
    throw InputError("dense matrix is " + std::to_string(dense.rows()) + "x" +
                     std::to_string(dense.cols()) + " but group sizes sum to " +
                     std::to_string(n));
  }
  std::vector<MatrixXd> blocks;
  Index off = 0;
  for (std::size_t r = 0; r < sizes.size(); ++r) {
    const Index m = sizes[r];
    for (Index i = off; i < off + m; ++i) {
      for (Index j = 0; j < n; ++j) {
        if ((j < off || j >= off + m) && dense(i, j) != 0.0) {
          throw InputError("entry (" + std::to_string(i) + "," + std::to_string(j) +
                           ") lies outside the diagonal blocks");
        }
      }
    }
    blocks.push_back(dense.block(off, off, m, m));
    off += m;
  }
  return BlockDiagonal(std::move(blocks));
}

MatrixXd BlockDiagonal::dense() const {
  MatrixXd out = MatrixXd::Zero(size_, size_);
  for (std::size_t r = 0; r < blocks_.size(); ++r) {
    out.block(offsets_[r], offsets_[r], sizes_[r], sizes_[r]) = blocks_[r];
  }
  return out;
}

VectorXd BlockDiagonal::apply(const VectorXd& v) const {
  if (v.size() != size_) throw InputError("vector length does not match block-diagonal order");
  VectorXd out(size_);
  for (std::size_t r = 0; r < blocks_.size(); ++r) {
    out.segment(offsets_[r], sizes_[r]).noalias() = blocks_[r] * v.segment(offsets_[r], sizes_[r]);
  }
  return out;
}

MatrixXd BlockDiagonal::apply(const MatrixXd& m) const {
  if (m.rows() != size_) throw InputError("matrix rows do not match block-diagonal order");
  MatrixXd out(size_, m.cols());
  for (std::size_t r = 0; r < blocks_.size(); ++r) {
    out.middleRows(offsets_[r], sizes_[r]).noalias() =
        blocks_[r] * m.middleRows(offsets_[r], sizes_[r]);
  }
  return out;
}

VectorXd BlockDiagonal::apply_transpose(const VectorXd& v) const {
  if (v.size() != size_) throw InputError("vector length does not match block-diagonal order");
  VectorXd out(size_);
  for (std::size_t r = 0; r < blocks_.size(); ++r) {
    out.segment(offsets_[r], sizes_[r]).noalias() =
        blocks_[r].transpose() * v.segment(offsets_[r], sizes_[r]);
  }
  return out;
}

namespace {

Eigen::PartialPivLU<MatrixXd> factor_block(const MatrixXd& block, std::size_t r, const char* what) {
  Eigen::PartialPivLU<MatrixXd> lu(block);
  const double rc = block.size() == 0 ? 1.0 : lu.rcond();
  if (!(rc > 1e-14)) {
    throw NumericalError(std::string(what) + " is singular in group " + std::to_string(r),
                         rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity());
  }
  return lu;
}

}  // namespace

VectorXd BlockDiagonal::solve(const VectorXd& b, const char* what) const {
  if (b.size() != size_) throw InputError("right-hand side length does not match");
  VectorXd out(size_);
  for (std::size_t r = 0; r < blocks_.size(); ++r) {
    if (sizes_[r] == 0) continue;
    auto lu = factor_block(blocks_[r], r, what);
    out.segment(offsets_[r], sizes_[r]) = lu.solve(b.segment(offsets_[r], sizes_[r]));
  }
  return out;
}

MatrixXd BlockDiagonal::solve(const MatrixXd& b, const char* what) const {
  if (b.rows() != size_) throw InputError("right-hand side rows do not match");
  MatrixXd out(size_, b.cols());
  for (std::size_t r = 0; r < blocks_.size(); ++r) {
    if (sizes_[r] == 0) continue;
    auto lu = factor_block(blocks_[r], r, what);
    out.middleRows(offsets_[r], sizes_[r]) = lu.solve(b.middleRows(offsets_[r], sizes_[r]));
  }
  return out;
}

BlockDiagonal BlockDiagonal::operator*(const BlockDiagonal& rhs) const {
  if (sizes_ != rhs.sizes_) throw InputError("block structures differ");
  std::vector<MatrixXd> out;
  out.reserve(blocks_.size());
  for (std::size_t r = 0; r < blocks_.size(); ++r) out.push_back(blocks_[r] * rhs.blocks_[r]);
  return BlockDiagonal(std::move(out));
}

BlockDiagonal BlockDiagonal::transpose() const {
  std::vector<MatrixXd> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(b.transpose());
  return BlockDiagonal(std::move(out));
}

BlockDiagonal BlockDiagonal::identity_minus(double c) const {
  std::vector<MatrixXd> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) {
    MatrixXd blk = -c * b;
    blk.diagonal().array() += 1.0;
    out.push_back(std::move(blk));
  }
  return BlockDiagonal(std::move(out));
}

double BlockDiagonal::trace() const {
  double t = 0.0;
  for (const auto& b : blocks_) t += b.trace();
  return t;
}

double BlockDiagonal::max_abs_asymmetry() const {
  double worst = 0.0;
  for (const auto& b : blocks_) {
    if (b.size() > 0) worst = std::max(worst, (b - b.transpose()).cwiseAbs().maxCoeff());
  }
  return worst;
}

double BlockDiagonal::row_sum_norm() const {
  double worst = 0.0;
  for (const auto& b : blocks_) {
    if (b.size() > 0) worst = std::max(worst, b.cwiseAbs().rowwise().sum().maxCoeff());
  }
  return worst;
}

}  // namespace netreg
