#include "netreg/graphs.hpp"

#include <cmath>
#include <string>

#include "netreg/errors.hpp"

namespace netreg {

void GroupedNetwork::validate() const {
  if (W.sizes() != group_sizes) throw InputError("W block structure does not match group sizes");
  if (M.sizes() != group_sizes) throw InputError("M block structure does not match group sizes");
  for (std::size_t r = 0; r < group_sizes.size(); ++r) {
    if (group_sizes[r] <= 0) throw InputError("group " + std::to_string(r) + " is empty");
    if (W.block(r).diagonal().cwiseAbs().maxCoeff() != 0.0) {
      throw InputError("W has a self-link in group " + std::to_string(r));
    }
    if (M.block(r).diagonal().cwiseAbs().maxCoeff() != 0.0) {
      throw InputError("M has a self-link in group " + std::to_string(r));
    }
    if (m_row_normalized) {
      const VectorXd sums = M.block(r).rowwise().sum();
      for (Index i = 0; i < sums.size(); ++i) {
        const bool nonzero_row = M.block(r).row(i).cwiseAbs().maxCoeff() > 0.0;
        if (nonzero_row && std::abs(sums(i) - 1.0) > 1e-12) {
          throw InputError("row " + std::to_string(i) + " of M in group " + std::to_string(r) +
                           " sums to " + std::to_string(sums(i)));
        }
      }
    }
  }
}

GroupedNetwork GroupedNetwork::from_blocks(BlockDiagonal W, BlockDiagonal M, bool m_row_normalized) {
  GroupedNetwork net;
  net.group_sizes = W.sizes();
  net.W = std::move(W);
  net.M = std::move(M);
  net.m_row_normalized = m_row_normalized;
  net.validate();
  return net;
}

GroupedNetwork GroupedNetwork::with_row_normalized_m(BlockDiagonal W) {
  BlockDiagonal M = row_normalize(W);
  return from_blocks(std::move(W), std::move(M), true);
}

GroupedNetwork GroupedNetwork::with_m_equal_w(BlockDiagonal W) {
  BlockDiagonal M = W;
  return from_blocks(std::move(W), std::move(M), false);
}

MatrixXd build_block_diagonal(const std::vector<MatrixXd>& blocks) {
  for (std::size_t r = 0; r < blocks.size(); ++r) {
    if (blocks[r].rows() != blocks[r].cols()) {
      throw InputError("block " + std::to_string(r) + " is not square");
    }
  }
  return BlockDiagonal(blocks).dense();
}

MatrixXd row_normalize(const MatrixXd& W) {
  if (W.size() > 0 && W.minCoeff() < 0.0) {
    throw InputError("row_normalize: negative entry in weight matrix");
  }
  MatrixXd out = W;
  for (Index i = 0; i < W.rows(); ++i) {
    const double s = W.row(i).sum();
    if (s > 0.0) out.row(i) /= s;
  }
  return out;
}

BlockDiagonal row_normalize(const BlockDiagonal& W) {
  std::vector<MatrixXd> blocks;
  blocks.reserve(W.block_count());
  for (std::size_t r = 0; r < W.block_count(); ++r) blocks.push_back(row_normalize(W.block(r)));
  return BlockDiagonal(std::move(blocks));
}

GroupedNetwork generate_mc_network(Index group_count, Index group_size, Index max_links, Rng& rng) {
  if (group_count < 1) throw InputError("group_count must be positive");
  if (group_size < 1) throw InputError("group_size must be positive");
  if (max_links < 0) throw InputError("max_links must be nonnegative");
  if (max_links >= group_size) {
    throw InputError("max_links (" + std::to_string(max_links) +
                     ") must be smaller than the group size (" + std::to_string(group_size) +
                     "); wrap-around would create self-links");
  }
  std::vector<MatrixXd> blocks;
  blocks.reserve(static_cast<std::size_t>(group_count));
  for (Index r = 0; r < group_count; ++r) {
    MatrixXd block = MatrixXd::Zero(group_size, group_size);
    for (Index i = 0; i < group_size; ++i) {
      const Index k = rng.uniform_int(0, max_links);
      for (Index s = 1; s <= k; ++s) block(i, (i + s) % group_size) = 1.0;
    }
    blocks.push_back(std::move(block));
  }
  return GroupedNetwork::with_row_normalized_m(BlockDiagonal(std::move(blocks)));
}

GroupedNetwork generate_mc_network(Index group_count, Index group_size, Index max_links,
                                   std::uint64_t seed) {
  Rng rng(seed);
  return generate_mc_network(group_count, group_size, max_links, rng);
}

}  // namespace netreg
