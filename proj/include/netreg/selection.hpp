#pragma once

#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "netreg/estimation.hpp"
#include "netreg/regularization.hpp"

namespace netreg {

enum class Criterion { Cp, GCV, LOO };

const char* to_string(Criterion c);
Criterion parse_criterion(const std::string& s);  // "cp", "gcv", "loo"

struct SelectionConfig {
  Criterion criterion = Criterion::Cp;
  VectorXd gamma_bar;  // direction (k entries); empty means e₁
  /// Grid of scheme parameters (α for T, iterations for LF, components for
  /// PC); empty means the default grid for the scheme.
  std::vector<double> grid;
  /// Use the literal delete-one refit instead of the linear-smoother
  /// identity for LOO.
  bool literal_loo = false;
  std::optional<double> lf_c;
};

/// Default grids: T 40 log-spaced points on [1e-8, 1e2]; LF {1, 2, 4, …, 2¹⁴};
/// PC k+1 … rank.
std::vector<double> default_grid(SchemeKind kind, Index rank, Index k);

Scheme make_scheme(SchemeKind kind, double parameter, std::optional<double> lf_c = std::nullopt);

/// Everything the selection rule needs that does not depend on α.
struct SelectionContext {
  std::shared_ptr<const Spectrum> spectrum;
  MatrixXd Q;                 // instrument matrix the spectrum came from (for LOO refits)
  VectorXd y_gamma;           // JR̃Z H̃⁻¹γ̄
  VectorXd coef;              // Ψ′y_γ
  double resid_full_sq = 0.0; // ‖(I − P_full) y_γ‖²
  double sigma2 = 0.0;        // σ̂²
  double sigma2_v = 0.0;      // σ̂²_v = ‖(I − P_full) y_γ‖²/n
  double gamma1 = 1.0;        // γ̄₁
  double d_iota_sq = 0.0;     // ι′D̃′D̃ι
  Index n = 0;
  Index k = 0;
};

/// Builds y_γ = JR̃Z H̃⁻¹γ̄ with H̃ = (JR̃Z)′P_full(JR̃Z)/n, σ̂² from the
/// preliminary δ̃, and D̃ι from (λ̃, ρ̃).
SelectionContext prepare_selection(const EstimationProblem& prob,
                                   std::shared_ptr<const Spectrum> spectrum, const MatrixXd& Q,
                                   const VectorXd& delta_tilde, double rho_tilde,
                                   const VectorXd& gamma_bar);

/// Goodness-of-fit value ϖ̂(α) for the projector weights q.
double criterion_value(const SelectionContext& ctx, const RegularizedProjector& P, Criterion c,
                       bool literal_loo = false);

/// σ̂²[ϖ̂ − σ̂²_v tr(P²)/n + σ̂² (trP)²/n · γ̄₁² · ι′D̃′D̃ι/n].
double s_hat(const SelectionContext& ctx, const RegularizedProjector& P, double criterion);

/// LOO by literal delete-one refits: for each i, the scheme is rebuilt on
/// the instruments without row i and the fit at i predicted from the rest.
double loo_literal(const SelectionContext& ctx, const Scheme& scheme);
/// LOO by the linear-smoother identity mean((v̂_i/(1 − P_ii))²).
double loo_identity(const SelectionContext& ctx, const RegularizedProjector& P);

struct CurvePoint {
  double alpha;
  double criterion;
  double s_hat;
};

struct SelectionResult {
  SchemeKind kind;
  double alpha_star;
  std::size_t index;
  std::vector<CurvePoint> curve;
  Scheme scheme;
};

/// Minimizes Ŝ over the grid. Ties go to more regularization (larger α for T,
/// fewer iterations or components for LF and PC). Throws NumericalError when
/// no grid point gives a finite value.
SelectionResult select_alpha(const SelectionContext& ctx, SchemeKind kind,
                             const SelectionConfig& config);

void write_curve_csv(std::ostream& os, const SelectionResult& r);

}  // namespace netreg
