#pragma once

#include <cstdint>
#include <vector>

#include "netreg/block_diagonal.hpp"
#include "netreg/rng.hpp"

namespace netreg {

/// Block-diagonal sociomatrices W and M over groups of sizes m_1..m_G.
///
/// Invariants (checked by validate()): both matrices share the group block
/// structure, have zero diagonals, and, when `m_row_normalized` is set, every
/// nonzero row of M sums to one.
struct GroupedNetwork {
  std::vector<Index> group_sizes;
  BlockDiagonal W;
  BlockDiagonal M;
  bool m_row_normalized = false;

  Index size() const noexcept { return W.size(); }
  Index group_count() const noexcept { return static_cast<Index>(group_sizes.size()); }

  void validate() const;

  /// M is the row normalization of W.
  static GroupedNetwork with_row_normalized_m(BlockDiagonal W);
  /// M equals W.
  static GroupedNetwork with_m_equal_w(BlockDiagonal W);
  static GroupedNetwork from_blocks(BlockDiagonal W, BlockDiagonal M, bool m_row_normalized);
};

/// D(A_1, ..., A_K) as a dense matrix. Throws InputError naming the first
/// non-square block.
MatrixXd build_block_diagonal(const std::vector<MatrixXd>& blocks);

/// Scales rows with positive sum to sum one; zero rows stay zero. Throws
/// InputError on negative entries.
MatrixXd row_normalize(const MatrixXd& W);
BlockDiagonal row_normalize(const BlockDiagonal& W);

/// Monte Carlo sociomatrix: for each row i of each group a link count k is
/// drawn uniformly from {0, ..., max_links}; entries i+1, ..., i+k (1-based,
/// wrapped modulo the group size) are set to 1. Draw order is row-major
/// within a group, groups in index order. M is the row-normalized W.
GroupedNetwork generate_mc_network(Index group_count, Index group_size, Index max_links, Rng& rng);
GroupedNetwork generate_mc_network(Index group_count, Index group_size, Index max_links,
                                   std::uint64_t seed);

}  // namespace netreg
