#include "netreg/regularization.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "netreg/errors.hpp"

namespace netreg {

double Spectrum::condition_number() const {
  if (nu.size() == 0) return std::numeric_limits<double>::infinity();
  return nu(0) / nu(nu.size() - 1);
}

Spectrum Spectrum::from_instruments(const MatrixXd& Q, Route route) {
  const Index n = Q.rows();
  const Index m = Q.cols();
  if (n == 0 || m == 0) throw InputError("empty instrument matrix");
  const double dn = static_cast<double>(n);
  if (route == Route::Auto) route = (4 * m < n) ? Route::Dual : Route::Primal;

  VectorXd vals;
  MatrixXd vecs;
  if (route == Route::Dual) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q.transpose() * Q / dn);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of Q'Q/n failed");
    vals = es.eigenvalues().reverse();
    vecs = es.eigenvectors().rowwise().reverse();
  } else {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Q * Q.transpose() / dn);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of QQ'/n failed");
    vals = es.eigenvalues().reverse();
    vecs = es.eigenvectors().rowwise().reverse();
  }

  Spectrum s;
  const double top = vals.size() ? vals(0) : 0.0;
  if (!(top > 0.0)) throw NumericalError("instrument matrix is zero");
  Index r = 0;
  while (r < vals.size() && vals(r) > 1e-12 * top) ++r;
  s.nu = vals.head(r);
  if (route == Route::Dual) {
    s.psi = Q * vecs.leftCols(r);
    for (Index j = 0; j < r; ++j) s.psi.col(j) /= std::sqrt(dn * s.nu(j));
  } else {
    s.psi = vecs.leftCols(r);
  }
  return s;
}

const char* to_string(SchemeKind k) {
  switch (k) {
    case SchemeKind::Tikhonov: return "T";
    case SchemeKind::LandweberFridman: return "LF";
    case SchemeKind::PrincipalComponents: return "PC";
  }
  return "?";
}

SchemeKind parse_scheme_kind(const std::string& s) {
  if (s == "T" || s == "t" || s == "tikhonov") return SchemeKind::Tikhonov;
  if (s == "LF" || s == "lf" || s == "landweber") return SchemeKind::LandweberFridman;
  if (s == "PC" || s == "pc" || s == "principal") return SchemeKind::PrincipalComponents;
  throw InputError("unknown scheme '" + s + "' (expected T, LF or PC)");
}

Scheme Scheme::tikhonov(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("Tikhonov alpha must be positive");
  Scheme s;
  s.kind = SchemeKind::Tikhonov;
  s.alpha = alpha;
  return s;
}

Scheme Scheme::landweber_fridman(Index iterations, std::optional<double> c) {
  if (iterations < 1) throw InputError("Landweber-Fridman needs at least one iteration");
  if (c && !(*c > 0.0)) throw InputError("Landweber-Fridman step c must be positive");
  Scheme s;
  s.kind = SchemeKind::LandweberFridman;
  s.iterations = iterations;
  s.alpha = 1.0 / static_cast<double>(iterations);
  s.c = c;
  return s;
}

Scheme Scheme::principal_components(Index components) {
  if (components < 1) throw InputError("principal components need at least one component");
  Scheme s;
  s.kind = SchemeKind::PrincipalComponents;
  s.components = components;
  s.alpha = 1.0 / static_cast<double>(components);
  return s;
}

Scheme Scheme::full_projection() {
  return principal_components(std::numeric_limits<Index>::max());
}

double Scheme::parameter() const {
  switch (kind) {
    case SchemeKind::Tikhonov: return alpha;
    case SchemeKind::LandweberFridman: return static_cast<double>(iterations);
    case SchemeKind::PrincipalComponents: return static_cast<double>(components);
  }
  return alpha;
}

std::string Scheme::describe() const {
  char buf[64];
  switch (kind) {
    case SchemeKind::Tikhonov: std::snprintf(buf, sizeof buf, "T(alpha=%.6g)", alpha); break;
    case SchemeKind::LandweberFridman:
      std::snprintf(buf, sizeof buf, "LF(iterations=%lld)", static_cast<long long>(iterations));
      break;
    case SchemeKind::PrincipalComponents:
      if (components == std::numeric_limits<Index>::max()) return "PC(all)";
      std::snprintf(buf, sizeof buf, "PC(components=%lld)", static_cast<long long>(components));
      break;
  }
  return buf;
}

double q_weight(const Scheme& scheme, double nu, Index j) {
  const double nu2 = nu * nu;
  switch (scheme.kind) {
    case SchemeKind::Tikhonov: return nu2 / (nu2 + scheme.alpha);
    case SchemeKind::LandweberFridman: {
      if (!scheme.c) throw InputError("Landweber-Fridman step c not set");
      const double cn = *scheme.c * nu2;
      if (!(cn < 1.0)) {
        throw InputError("Landweber-Fridman step violates c * nu^2 < 1 (c * nu^2 = " +
                         std::to_string(cn) + ")");
      }
      return 1.0 - std::pow(1.0 - cn, static_cast<double>(scheme.iterations));
    }
    case SchemeKind::PrincipalComponents: return j <= scheme.components ? 1.0 : 0.0;
  }
  return 0.0;
}

VectorXd q_weights(const Spectrum& s, const Scheme& scheme) {
  Scheme sc = scheme;
  if (sc.kind == SchemeKind::LandweberFridman && !sc.c && s.rank() > 0) {
    sc.c = 0.9 / (s.nu(0) * s.nu(0));
  }
  VectorXd q(s.rank());
  for (Index j = 0; j < s.rank(); ++j) q(j) = q_weight(sc, s.nu(j), j + 1);
  return q;
}

RegularizedProjector::RegularizedProjector(std::shared_ptr<const Spectrum> spectrum, Scheme scheme)
    : spectrum_(std::move(spectrum)), scheme_(std::move(scheme)) {
  if (!spectrum_) throw InputError("null spectrum");
  if (scheme_.kind == SchemeKind::LandweberFridman && !scheme_.c && spectrum_->rank() > 0) {
    scheme_.c = 0.9 / (spectrum_->nu(0) * spectrum_->nu(0));
  }
  q_ = q_weights(*spectrum_, scheme_);
}

VectorXd RegularizedProjector::apply(const VectorXd& e) const {
  if (e.size() != spectrum_->n()) throw InputError("vector length does not match projector order");
  const VectorXd coef = q_.cwiseProduct(spectrum_->psi.transpose() * e);
  return spectrum_->psi * coef;
}

MatrixXd RegularizedProjector::apply(const MatrixXd& e) const {
  if (e.rows() != spectrum_->n()) throw InputError("matrix rows do not match projector order");
  const MatrixXd coef = q_.asDiagonal() * (spectrum_->psi.transpose() * e);
  return spectrum_->psi * coef;
}

VectorXd RegularizedProjector::diagonal() const {
  return spectrum_->psi.array().square().matrix() * q_;
}

MatrixXd RegularizedProjector::dense() const {
  return spectrum_->psi * q_.asDiagonal() * spectrum_->psi.transpose();
}

VectorXd apply_projector(const Spectrum& s, const Scheme& scheme, const VectorXd& e) {
  if (e.size() != s.n()) throw InputError("vector length does not match projector order");
  const VectorXd q = q_weights(s, scheme);
  return s.psi * q.cwiseProduct(s.psi.transpose() * e);
}

ProjectorTraces projector_traces(const Spectrum& s, const Scheme& scheme) {
  const VectorXd q = q_weights(s, scheme);
  return {q.sum(), q.squaredNorm()};
}

}  // namespace netreg
