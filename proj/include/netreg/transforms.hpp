#pragma once

#include "netreg/block_diagonal.hpp"
#include "netreg/graphs.hpp"

namespace netreg {

/// Parameters of Y = λWY + X₁β₁ + WX₂β₂ + ιγ + u, u = ρMu + ε.
struct ModelParams {
  double lambda = 0.0;
  VectorXd beta1;
  VectorXd beta2;
  double rho = 0.0;
  VectorXd gamma;  // one fixed effect per group
  double sigma2 = 1.0;

  /// β = (β₁, β₂) stacked in the column order of X = (X₁, WX₂).
  VectorXd beta() const;
  /// Throws InputError if sigma2 ≤ 0 or ‖λW‖∞ ≥ 1.
  void check(const BlockDiagonal& W) const;
};

/// S(λ) = I − λW
MatrixXd s_matrix(double lambda, const MatrixXd& W);
BlockDiagonal s_matrix(double lambda, const BlockDiagonal& W);

/// R(ρ) = I − ρM
MatrixXd r_matrix(double rho, const MatrixXd& M);
BlockDiagonal r_matrix(double rho, const BlockDiagonal& M);

/// Projector onto the orthogonal complement of span{ι, Mι} for one group.
/// Falls back to I − ιι′/m when Mι is collinear with ι (relative residual
/// below 1e-8). The pseudo-inverse cuts singular values below 1e-10·σ_max.
MatrixXd j_block(const MatrixXd& M_r);
BlockDiagonal j_projector(const BlockDiagonal& M);
/// Dense variant: M is split by `group_sizes` first.
MatrixXd j_projector(std::span<const Index> group_sizes, const MatrixXd& M);

/// X = (X₁, WX₂).
MatrixXd regressors(const GroupedNetwork& net, const MatrixXd& x1, const MatrixXd& x2);

/// JR(ρ)(Y − λWY − Xβ) with X = (X₁, WX₂); equals Jε at the true parameters.
VectorXd structural_residual(const ModelParams& p, const VectorXd& y, const MatrixXd& x1,
                             const MatrixXd& x2, const GroupedNetwork& net);

/// Y = S⁻¹(Xβ + ιγ) + S⁻¹R⁻¹ε via block solves. Throws NumericalError
/// naming "S(lambda)" or "R(rho)" when a factor is singular.
VectorXd reduced_form(const ModelParams& p, const MatrixXd& x1, const MatrixXd& x2,
                      const VectorXd& eps, const GroupedNetwork& net);

/// ιγ: each group's effect repeated over its members.
VectorXd expand_group_effects(std::span<const Index> group_sizes, const VectorXd& gamma);

}  // namespace netreg
