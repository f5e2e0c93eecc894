#include "netreg/estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "netreg/errors.hpp"
#include "netreg/transforms.hpp"

namespace netreg {

EstimationProblem::EstimationProblem(const GroupedNetwork& net, PanelData data)
    : net_(net), data_(std::move(data)) {
  const Index n = net_.size();
  if (data_.y.size() != n) {
    throw InputError("Y has " + std::to_string(data_.y.size()) + " rows, network has " +
                     std::to_string(n) + " nodes");
  }
  if (data_.x1.cols() == 0 && data_.x2.cols() == 0) throw InputError("no regressors");
  if (data_.x1.cols() == 0) data_.x1.resize(n, 0);
  if (data_.x2.cols() == 0) data_.x2.resize(n, 0);
  J_ = j_projector(net_.M);
  X_ = regressors(net_, data_.x1, data_.x2);
  Z_.resize(n, 1 + X_.cols());
  Z_ << net_.W.apply(data_.y), X_;
}

std::vector<std::string> EstimationProblem::coefficient_names() const {
  std::vector<std::string> out{"lambda"};
  for (Index j = 0; j < data_.x1.cols(); ++j) {
    out.push_back(static_cast<Index>(data_.x1_names.size()) == data_.x1.cols()
                      ? data_.x1_names[static_cast<std::size_t>(j)]
                      : "beta1_" + std::to_string(j + 1));
  }
  for (Index j = 0; j < data_.x2.cols(); ++j) {
    out.push_back(static_cast<Index>(data_.x2_names.size()) == data_.x2.cols()
                      ? "W*" + data_.x2_names[static_cast<std::size_t>(j)]
                      : "beta2_" + std::to_string(j + 1));
  }
  return out;
}

MatrixXd EstimationProblem::r_apply(double rho, const MatrixXd& A) const {
  return A - rho * net_.M.apply(A);
}

VectorXd EstimationProblem::r_apply(double rho, const VectorXd& a) const {
  return a - rho * net_.M.apply(a);
}

NormalEquations solve_projected(const RegularizedProjector& P, const MatrixXd& A, const VectorXd& b) {
  const MatrixXd PA = P.apply(A);
  NormalEquations out;
  out.H = A.transpose() * PA;
  out.H = 0.5 * (out.H + out.H.transpose()).eval();
  const VectorXd rhs = PA.transpose() * b;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(out.H, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  out.condition_number = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(hi > 0.0) || !(out.condition_number < 1e14)) {
    throw NumericalError("normal equations Z'R'PRZ are singular", out.condition_number);
  }
  out.delta = out.H.ldlt().solve(rhs);
  return out;
}

namespace {

std::shared_ptr<const Spectrum> full_spectrum(const InstrumentSet& q) {
  if (q.cols() == 0) throw InputError("instrument set has no columns");
  return std::make_shared<const Spectrum>(Spectrum::from_instruments(q.Q));
}

double residual_variance(const EstimationProblem& prob, const VectorXd& delta, double rho) {
  const VectorXd e = prob.y() - prob.Z() * delta;
  const VectorXd eh = prob.J().apply(prob.r_apply(rho, e));
  return eh.squaredNorm() / static_cast<double>(prob.n());
}

VectorXd std_errors(double sigma2, const MatrixXd& H) {
  const MatrixXd Hinv = H.ldlt().solve(MatrixXd::Identity(H.rows(), H.cols()));
  return (sigma2 * Hinv.diagonal()).cwiseMax(0.0).cwiseSqrt();
}

}  // namespace

VectorXd preliminary_delta(const EstimationProblem& prob, const InstrumentSet& q1) {
  if (q1.rows() != prob.n()) throw InputError("Q1 rows do not match the sample");
  const RegularizedProjector P(full_spectrum(q1), Scheme::full_projection());
  if (P.spectrum().rank() < prob.k()) {
    throw NumericalError("preliminary instrument set has rank " +
                             std::to_string(P.spectrum().rank()) + " < " +
                             std::to_string(prob.k()) + " regressors",
                         std::numeric_limits<double>::infinity());
  }
  return solve_projected(P, prob.Z(), prob.y()).delta;
}

RhoEstimate preliminary_rho(const EstimationProblem& prob, const VectorXd& delta_tilde) {
  const GroupedNetwork& net = prob.network();
  const BlockDiagonal& J = prob.J();
  const VectorXd e = prob.y() - prob.Z() * delta_tilde;
  const VectorXd a = J.apply(e);
  const VectorXd b = J.apply(net.M.apply(e));

  RhoEstimate out;
  const double scale = std::max(prob.y().squaredNorm(), 1e-300);
  if (a.squaredNorm() <= 1e-20 * scale && b.squaredNorm() <= 1e-20 * scale) {
    out.degenerate = true;
    return out;
  }

  const double trJ = J.trace();
  // Quadratic coefficients (c0 + c1 ρ + c2 ρ²) of each moment ε̃(ρ)′M_kε̃(ρ).
  std::array<std::array<double, 3>, 3> coef{};
  for (int k = 0; k < 3; ++k) {
    double trAJ = 0.0;
    VectorXd Aa(a.size()), Ab(b.size());
    for (std::size_t r = 0; r < net.W.block_count(); ++r) {
      MatrixXd A_r;
      if (k == 0) A_r = net.W.block(r);
      else if (k == 1) A_r = net.M.block(r);
      else A_r = net.M.block(r) * net.W.block(r);
      trAJ += A_r.cwiseProduct(J.block(r).transpose()).sum();
      const Index off = net.W.offset(r), m = net.group_sizes[r];
      Aa.segment(off, m).noalias() = A_r * a.segment(off, m);
      Ab.segment(off, m).noalias() = A_r * b.segment(off, m);
    }
    const double c = trAJ / trJ;
    coef[k][0] = a.dot(Aa) - c * a.dot(a);
    coef[k][1] = -(a.dot(Ab) + b.dot(Aa)) + 2.0 * c * a.dot(b);
    coef[k][2] = b.dot(Ab) - c * b.dot(b);
  }
  auto objective = [&](double rho) {
    double f = 0.0;
    for (const auto& c : coef) {
      const double g = c[0] + rho * (c[1] + rho * c[2]);
      f += g * g;
    }
    return f;
  };

  double coef_scale = 0.0;
  for (const auto& c : coef) coef_scale += std::abs(c[0]) + std::abs(c[1]) + std::abs(c[2]);
  if (!(coef_scale > 1e-14 * scale)) {
    out.degenerate = true;
    return out;
  }

  int best = 0;
  double fbest = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 198; ++i) {
    const double r = -0.99 + 0.01 * i;
    const double f = objective(r);
    if (f < fbest) {
      fbest = f;
      best = i;
    }
  }
  const double r0 = -0.99 + 0.01 * best;
  double lo = std::max(-0.99, r0 - 0.01), hi = std::min(0.99, r0 + 0.01);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
  double f1 = objective(x1), f2 = objective(x2);
  while (hi - lo > 1e-6) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - invphi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + invphi * (hi - lo);
      f2 = objective(x2);
    }
  }
  const double refined = 0.5 * (lo + hi);
  const double frefined = objective(refined);
  if (frefined <= fbest) {
    out.rho = refined;
    out.objective = frefined;
  } else {
    out.rho = r0;
    out.objective = fbest;
  }
  return out;
}

EstimationResult regularized_2sls(const EstimationProblem& prob, const RegularizedProjector& P,
                                  double rho_tilde) {
  if (P.spectrum().n() != prob.n()) throw InputError("projector order does not match the sample");
  const MatrixXd A = prob.r_apply(rho_tilde, prob.Z());
  const VectorXd b = prob.r_apply(rho_tilde, prob.y());
  const NormalEquations ne = solve_projected(P, A, b);

  EstimationResult res;
  res.estimator = std::string(to_string(P.scheme().kind)) + "-2SLS";
  res.names = prob.coefficient_names();
  res.delta = ne.delta;
  res.rho_tilde = rho_tilde;
  res.sigma2_hat = residual_variance(prob, ne.delta, rho_tilde);
  res.scheme = P.scheme();
  res.alpha_star = P.scheme().parameter();
  res.std_errors = std_errors(res.sigma2_hat, ne.H);
  res.tr_P = P.trace();
  res.tr_P2 = P.trace_squared();
  res.instrument_condition_number = P.spectrum().condition_number();
  res.normal_condition_number = ne.condition_number;
  return res;
}

EstimationResult classical_2sls(const EstimationProblem& prob, const InstrumentSet& q,
                                double rho_tilde) {
  const RegularizedProjector P(full_spectrum(q), Scheme::full_projection());
  EstimationResult res = regularized_2sls(prob, P, rho_tilde);
  res.estimator = "2SLS";
  res.scheme.reset();
  res.alpha_star = std::numeric_limits<double>::quiet_NaN();
  return res;
}

PluginTerms plugin_terms(const EstimationProblem& prob, const VectorXd& delta_tilde,
                         double rho_tilde) {
  PluginTerms t;
  t.sigma2 = residual_variance(prob, delta_tilde, rho_tilde);
  t.lambda_tilde = delta_tilde(0);
  t.rho_tilde = rho_tilde;
  return t;
}

MatrixXd apply_d_tilde(const EstimationProblem& prob, double lambda_tilde, double rho_tilde,
                       const MatrixXd& A) {
  const GroupedNetwork& net = prob.network();
  const MatrixXd Rinv = r_matrix(rho_tilde, net.M).solve(A, "R(rho)");
  const MatrixXd Sinv = s_matrix(lambda_tilde, net.W).solve(Rinv, "S(lambda)");
  return prob.J().apply(prob.r_apply(rho_tilde, net.W.apply(Sinv)));
}

double trace_pd(const EstimationProblem& prob, const RegularizedProjector& P, double lambda_tilde,
                double rho_tilde) {
  const MatrixXd& psi = P.spectrum().psi;
  const MatrixXd Dpsi = apply_d_tilde(prob, lambda_tilde, rho_tilde, psi);
  const VectorXd diag = psi.cwiseProduct(Dpsi).colwise().sum().transpose();
  return P.q().dot(diag);
}

EstimationResult bias_corrected_2sls(const EstimationProblem& prob, const RegularizedProjector& P,
                                     const VectorXd& delta_tilde, double rho_tilde) {
  if (!(P.trace() > 0.0)) {
    throw NumericalError("bias correction undefined for a zero-trace projector", 0.0);
  }
  if (delta_tilde.size() != prob.k()) throw InputError("preliminary delta has the wrong length");
  const MatrixXd A = prob.r_apply(rho_tilde, prob.Z());
  const VectorXd b = prob.r_apply(rho_tilde, prob.y());
  const NormalEquations ne = solve_projected(P, A, b);
  const PluginTerms t = plugin_terms(prob, delta_tilde, rho_tilde);
  const double tr = trace_pd(prob, P, t.lambda_tilde, rho_tilde);
  const VectorXd e1 = VectorXd::Unit(prob.k(), 0);
  const VectorXd correction = t.sigma2 * tr * ne.H.ldlt().solve(e1);

  EstimationResult res;
  res.estimator = "bias-corrected 2SLS";
  res.names = prob.coefficient_names();
  res.delta = ne.delta - correction;
  res.rho_tilde = rho_tilde;
  res.sigma2_hat = residual_variance(prob, res.delta, rho_tilde);
  res.std_errors = std_errors(res.sigma2_hat, ne.H);
  res.tr_P = P.trace();
  res.tr_P2 = P.trace_squared();
  res.instrument_condition_number = P.spectrum().condition_number();
  res.normal_condition_number = ne.condition_number;
  return res;
}

}  // namespace netreg
