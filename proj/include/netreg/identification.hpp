#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "netreg/block_diagonal.hpp"
#include "netreg/graphs.hpp"

namespace netreg {

struct EigenCluster {
  double value;
  Index multiplicity;
};

struct DistinctEigenvalues {
  Index count = 0;
  std::vector<EigenCluster> clusters;  // descending by value
};

enum class Verdict { NotIdentified, PossiblyIdentified, Identified, WeaklyIdentified };

const char* to_string(Verdict v);

/// Condition number above which the verdict becomes WeaklyIdentified. An
/// engineering threshold: the underlying theory gives no cutoff.
inline constexpr double kWeakIdentificationThreshold = 1e6;

/// Eigenvalues of a symmetric W, sorted descending and clustered greedily: a
/// new cluster opens when the gap to the previous eigenvalue exceeds
/// tol·max(1, |ν|max). Each cluster reports the mean of its members.
/// Throws InputError (with the largest |W − W′| entry) if W is not symmetric
/// to 1e-10.
DistinctEigenvalues distinct_eigenvalues(const MatrixXd& W, double tol = 1e-8);
/// Block-wise: the spectrum is the union of the block spectra.
DistinctEigenvalues distinct_eigenvalues(const BlockDiagonal& W, double tol = 1e-8);

/// NotIdentified iff W has at most two distinct eigenvalues, otherwise
/// PossiblyIdentified.
Verdict proposition1_check(const MatrixXd& W, double tol = 1e-8);
Verdict proposition1_check(const BlockDiagonal& W, double tol = 1e-8);

struct RankCheck {
  bool full_rank = false;
  Index rank = 0;
  Index columns = 0;
  /// Ratio of extreme eigenvalues of the stack's Gram matrix (infinite when
  /// rank-deficient).
  double condition_number = 0.0;
};

/// Numerical rank (singular values above 1e-10·σmax) and Gram condition
/// number of an arbitrary stack.
RankCheck rank_check(const MatrixXd& Q);

/// With rho_zero: the stack [WX, W²X, …, W^{ϱ−1}X, X]. Otherwise the stack
/// [Q₀, MQ₀] with Q₀ = [WX, …, W^{ϱ−1}X, Wι, …, W^{ϱ−1}ι, X], where ι holds
/// one indicator column per group. ϱ is the distinct-eigenvalue count of W.
RankCheck proposition2_rank_check(const GroupedNetwork& net, const MatrixXd& X, bool rho_zero,
                                  double tol = 1e-8);
RankCheck proposition2_rank_check(const GroupedNetwork& net, const MatrixXd& X, bool rho_zero,
                                  Index distinct_count);

/// ((m − 1)β₁ − β₂)/(m − 1 + λ): the within-group reduced-form coefficient in
/// a complete-graph group of size m with weights 1/(m − 1).
double lee_reduced_coefficient(Index m_r, double lambda, double beta1, double beta2);

/// Block-diagonal matrix with complete-graph blocks weighted 1/(m_r − 1).
BlockDiagonal lee_block_matrix(const std::vector<Index>& group_sizes);

struct IdentificationReport {
  DistinctEigenvalues eigen;
  std::optional<RankCheck> stack;  // absent when no regressors were given
  Verdict verdict = Verdict::NotIdentified;
  std::string note;

  /// Human-readable summary; first line is e.g. "NotIdentified (2 distinct eigenvalues)".
  void print_text(std::ostream& os) const;
  /// key=value lines.
  void print_kv(std::ostream& os) const;
};

/// Full diagnostic. X may be empty (0 columns), in which case the rank check
/// is skipped and the verdict rests on the eigenvalue count alone.
IdentificationReport diagnose(const GroupedNetwork& net, const MatrixXd& X, bool rho_zero = true,
                              double tol = 1e-8);

}  // namespace netreg
