#pragma once

#include <memory>
#include <optional>
#include <string>

#include "netreg/block_diagonal.hpp"

namespace netreg {

/// Nonzero eigenpairs of QQ′/n, descending. Eigenvalues below 1e-12·ν₁ are
/// discarded.
struct Spectrum {
  enum class Route { Auto, Primal, Dual };

  VectorXd nu;   // ν₁ ≥ ν₂ ≥ … > 0
  MatrixXd psi;  // n × r, orthonormal columns

  Index n() const noexcept { return psi.rows(); }
  Index rank() const noexcept { return nu.size(); }
  /// ν₁/ν_r over the retained spectrum.
  double condition_number() const;

  /// Auto uses the m×m route (eigenvectors φ of Q′Q/n, ψ = Qφ/√(nν)) when
  /// m < n/4 and the n×n route otherwise.
  static Spectrum from_instruments(const MatrixXd& Q, Route route = Route::Auto);
};

enum class SchemeKind { Tikhonov, LandweberFridman, PrincipalComponents };

const char* to_string(SchemeKind k);
SchemeKind parse_scheme_kind(const std::string& s);  // "T", "LF", "PC"

/// Regularization scheme and its parameter: α for Tikhonov, the iteration
/// count 1/α for Landweber-Fridman, the component count 1/α for principal
/// components.
struct Scheme {
  SchemeKind kind = SchemeKind::Tikhonov;
  double alpha = 0.0;
  Index iterations = 0;
  Index components = 0;
  std::optional<double> c;  // LF step; defaults to 0.9/ν₁² per spectrum

  static Scheme tikhonov(double alpha);
  static Scheme landweber_fridman(Index iterations, std::optional<double> c = std::nullopt);
  static Scheme principal_components(Index components);
  /// PC keeping every component (ordinary projection).
  static Scheme full_projection();

  /// α, iterations, or components, as a number.
  double parameter() const;
  std::string describe() const;
};

/// q(α, ν²) for the eigenvalue ν at 1-based rank position j. LF needs
/// `scheme.c` set and rejects c·ν² ≥ 1.
double q_weight(const Scheme& scheme, double nu, Index j);

/// All q weights over a spectrum; fills the LF default step from ν₁.
VectorXd q_weights(const Spectrum& s, const Scheme& scheme);

/// P^α = Σ q_j ψ_j ψ_j′, applied without materializing the n×n matrix.
class RegularizedProjector {
 public:
  RegularizedProjector(std::shared_ptr<const Spectrum> spectrum, Scheme scheme);

  const Spectrum& spectrum() const { return *spectrum_; }
  std::shared_ptr<const Spectrum> spectrum_ptr() const { return spectrum_; }
  const Scheme& scheme() const { return scheme_; }
  const VectorXd& q() const { return q_; }

  VectorXd apply(const VectorXd& e) const;
  MatrixXd apply(const MatrixXd& e) const;
  double trace() const { return q_.sum(); }
  double trace_squared() const { return q_.squaredNorm(); }
  /// Diagonal entries P_ii.
  VectorXd diagonal() const;
  MatrixXd dense() const;

 private:
  std::shared_ptr<const Spectrum> spectrum_;
  Scheme scheme_;
  VectorXd q_;
};

VectorXd apply_projector(const Spectrum& s, const Scheme& scheme, const VectorXd& e);

struct ProjectorTraces {
  double tr_P;
  double tr_P2;
};
ProjectorTraces projector_traces(const Spectrum& s, const Scheme& scheme);

}  // namespace netreg
