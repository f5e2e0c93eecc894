#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "netreg/block_diagonal.hpp"
#include "netreg/graphs.hpp"
#include "netreg/instruments.hpp"
#include "netreg/regularization.hpp"

namespace netreg {

/// Outcome Y and regressor blocks X₁ (own characteristics) and X₂
/// (characteristics entering through WX₂).
struct PanelData {
  VectorXd y;
  MatrixXd x1;
  MatrixXd x2;
  std::vector<std::string> x1_names;
  std::vector<std::string> x2_names;
};

/// Quantities shared by every estimator on one data set: J, X = (X₁, WX₂),
/// Z = (WY, X).
class EstimationProblem {
 public:
  EstimationProblem(const GroupedNetwork& net, PanelData data);

  const GroupedNetwork& network() const { return net_; }
  const PanelData& data() const { return data_; }
  const BlockDiagonal& J() const { return J_; }
  const MatrixXd& X() const { return X_; }
  const MatrixXd& Z() const { return Z_; }
  const VectorXd& y() const { return data_.y; }
  Index n() const { return Z_.rows(); }
  Index k() const { return Z_.cols(); }
  /// Coefficient names: "lambda", then β names.
  std::vector<std::string> coefficient_names() const;

  /// R(ρ)A
  MatrixXd r_apply(double rho, const MatrixXd& A) const;
  VectorXd r_apply(double rho, const VectorXd& a) const;

 private:
  GroupedNetwork net_;
  PanelData data_;
  BlockDiagonal J_;
  MatrixXd X_;
  MatrixXd Z_;
};

struct EstimationResult {
  std::string estimator;
  std::vector<std::string> names;
  VectorXd delta;                       // (λ, β₁, β₂)
  double rho_tilde = 0.0;
  double sigma2_hat = 0.0;
  std::optional<Scheme> scheme;
  double alpha_star = std::numeric_limits<double>::quiet_NaN();
  VectorXd std_errors;
  double tr_P = std::numeric_limits<double>::quiet_NaN();
  double tr_P2 = std::numeric_limits<double>::quiet_NaN();
  double instrument_condition_number = std::numeric_limits<double>::quiet_NaN();
  double normal_condition_number = std::numeric_limits<double>::quiet_NaN();
  std::optional<Index> distinct_eigenvalues;
  std::vector<std::string> warnings;
  std::string caveat =
      "standard errors use sigma2 * (Z'R'PRZ)^-1 and do not account for the "
      "effect of regularization or of the data-driven choice of alpha";
};

/// Solution of (A′PA) δ = A′Pb with A = R̃Z, b = R̃Y.
struct NormalEquations {
  MatrixXd H;  // A′PA
  VectorXd delta;
  double condition_number;
};

/// Solves the projected normal equations; throws NumericalError with the
/// condition number when A′PA is singular (condition above 1e14).
NormalEquations solve_projected(const RegularizedProjector& P, const MatrixXd& A, const VectorXd& b);

/// [Z′P₁Z]⁻¹Z′P₁Y with P₁ the ordinary projection on col(Q₁); no R transform.
VectorXd preliminary_delta(const EstimationProblem& prob, const InstrumentSet& q1);

struct RhoEstimate {
  double rho = 0.0;
  double objective = 0.0;
  bool degenerate = false;
};

/// Method-of-moments ρ̃: minimizes Σ_k (ε̃′M_kε̃)² over ρ ∈ [−0.99, 0.99], with
/// ε̃(ρ) = JR(ρ)(Y − Zδ̃) and M_k = JAJ − tr(JAJ)I/tr(J), A ∈ {W, M, MW}.
/// Grid of step 0.01, then golden-section refinement to 1e-6. Returns ρ = 0
/// flagged degenerate when the objective is flat (ε̃ ≈ 0).
RhoEstimate preliminary_rho(const EstimationProblem& prob, const VectorXd& delta_tilde);

/// δ̂ = (Z′R̃′PR̃Z)⁻¹Z′R̃′PR̃Y.
EstimationResult regularized_2sls(const EstimationProblem& prob, const RegularizedProjector& P,
                                  double rho_tilde);

/// Ordinary 2SLS on col(Q) after the R̃ transform.
EstimationResult classical_2sls(const EstimationProblem& prob, const InstrumentSet& q,
                                double rho_tilde);

/// Plug-in quantities shared by the bias correction and the selection rule.
struct PluginTerms {
  double sigma2 = 0.0;       // ε̂′ε̂/n with ε̂ = JR̃(Y − Zδ̃)
  double lambda_tilde = 0.0;
  double rho_tilde = 0.0;
};
PluginTerms plugin_terms(const EstimationProblem& prob, const VectorXd& delta_tilde,
                         double rho_tilde);

/// D̃A with D̃ = JR̃WŜ⁻¹R̃⁻¹, Ŝ = I − λ̃W, computed block-wise.
MatrixXd apply_d_tilde(const EstimationProblem& prob, double lambda_tilde, double rho_tilde,
                       const MatrixXd& A);

/// tr(P D̃) = Σ_j q_j ψ_j′ D̃ ψ_j.
double trace_pd(const EstimationProblem& prob, const RegularizedProjector& P, double lambda_tilde,
                double rho_tilde);

/// δ̂ − σ̂²·tr(PD̃)·(Z′R̃′PR̃Z)⁻¹e₁, with δ̂ the 2SLS estimate under P (the
/// ordinary projection on the many-instrument set in the simulation).
/// Throws NumericalError when tr(P) = 0.
EstimationResult bias_corrected_2sls(const EstimationProblem& prob, const RegularizedProjector& P,
                                     const VectorXd& delta_tilde, double rho_tilde);

}  // namespace netreg
