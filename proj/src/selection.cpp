#include "netreg/selection.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "netreg/errors.hpp"

namespace netreg {

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::Cp: return "cp";
    case Criterion::GCV: return "gcv";
    case Criterion::LOO: return "loo";
  }
  return "?";
}

Criterion parse_criterion(const std::string& s) {
  if (s == "cp" || s == "Cp" || s == "CP" || s == "mallows") return Criterion::Cp;
  if (s == "gcv" || s == "GCV") return Criterion::GCV;
  if (s == "loo" || s == "LOO" || s == "cv") return Criterion::LOO;
  throw InputError("unknown criterion '" + s + "' (expected cp, gcv or loo)");
}

std::vector<double> default_grid(SchemeKind kind, Index rank, Index k) {
  std::vector<double> g;
  switch (kind) {
    case SchemeKind::Tikhonov:
      for (int i = 0; i < 40; ++i) g.push_back(std::pow(10.0, -8.0 + 10.0 * i / 39.0));
      break;
    case SchemeKind::LandweberFridman:
      for (int i = 0; i <= 14; ++i) g.push_back(std::ldexp(1.0, i));
      break;
    case SchemeKind::PrincipalComponents:
      for (Index c = k + 1; c <= rank; ++c) g.push_back(static_cast<double>(c));
      break;
  }
  return g;
}

Scheme make_scheme(SchemeKind kind, double parameter, std::optional<double> lf_c) {
  switch (kind) {
    case SchemeKind::Tikhonov: return Scheme::tikhonov(parameter);
    case SchemeKind::LandweberFridman:
      return Scheme::landweber_fridman(static_cast<Index>(std::llround(parameter)), lf_c);
    case SchemeKind::PrincipalComponents:
      return Scheme::principal_components(static_cast<Index>(std::llround(parameter)));
  }
  throw InputError("unknown scheme");
}

SelectionContext prepare_selection(const EstimationProblem& prob,
                                   std::shared_ptr<const Spectrum> spectrum, const MatrixXd& Q,
                                   const VectorXd& delta_tilde, double rho_tilde,
                                   const VectorXd& gamma_bar) {
  if (!spectrum) throw InputError("null spectrum");
  const Index n = prob.n(), k = prob.k();
  if (spectrum->n() != n) throw InputError("spectrum order does not match the sample");
  VectorXd gb = gamma_bar.size() ? gamma_bar : VectorXd::Unit(k, 0);
  if (gb.size() != k) throw InputError("gamma_bar must have one entry per coefficient");
  if (gb.norm() == 0.0) throw InputError("gamma_bar must be nonzero");

  SelectionContext ctx;
  ctx.n = n;
  ctx.k = k;
  ctx.Q = Q;
  ctx.gamma1 = gb(0);
  const double dn = static_cast<double>(n);
  const MatrixXd& psi = spectrum->psi;

  const MatrixXd JRZ = prob.J().apply(prob.r_apply(rho_tilde, prob.Z()));
  const MatrixXd PsiT_JRZ = psi.transpose() * JRZ;
  MatrixXd H = PsiT_JRZ.transpose() * PsiT_JRZ / dn;
  H = 0.5 * (H + H.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(cond < 1e14)) throw NumericalError("preliminary H matrix is singular", cond);
  const VectorXd h = H.ldlt().solve(gb);
  ctx.y_gamma = JRZ * h;
  ctx.coef = psi.transpose() * ctx.y_gamma;
  ctx.resid_full_sq = (ctx.y_gamma - psi * ctx.coef).squaredNorm();
  ctx.sigma2_v = ctx.resid_full_sq / dn;

  const PluginTerms t = plugin_terms(prob, delta_tilde, rho_tilde);
  ctx.sigma2 = t.sigma2;
  const VectorXd d_iota = apply_d_tilde(prob, t.lambda_tilde, rho_tilde, MatrixXd::Ones(n, 1));
  ctx.d_iota_sq = d_iota.squaredNorm();
  ctx.spectrum = std::move(spectrum);
  return ctx;
}

namespace {

VectorXd residual(const SelectionContext& ctx, const VectorXd& q) {
  return ctx.y_gamma - ctx.spectrum->psi * q.cwiseProduct(ctx.coef);
}

double residual_sq(const SelectionContext& ctx, const VectorXd& q) {
  const VectorXd w = (VectorXd::Ones(q.size()) - q).cwiseProduct(ctx.coef);
  return ctx.resid_full_sq + w.squaredNorm();
}

}  // namespace

double loo_identity(const SelectionContext& ctx, const RegularizedProjector& P) {
  const VectorXd v = residual(ctx, P.q());
  const VectorXd d = P.diagonal();
  double s = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    const double r = v(i) / (1.0 - d(i));
    s += r * r;
  }
  return s / static_cast<double>(v.size());
}

double loo_literal(const SelectionContext& ctx, const Scheme& scheme) {
  const Index n = ctx.Q.rows(), m = ctx.Q.cols();
  if (n < 3) throw InputError("leave-one-out needs at least three observations");
  Scheme sc = scheme;
  if (sc.kind == SchemeKind::LandweberFridman && !sc.c) {
    sc.c = 0.9 / (ctx.spectrum->nu(0) * ctx.spectrum->nu(0));
  }
  const double dn1 = static_cast<double>(n - 1);
  double total = 0.0;
  MatrixXd Qi(n - 1, m);
  VectorXd yi(n - 1);
  for (Index i = 0; i < n; ++i) {
    Qi.topRows(i) = ctx.Q.topRows(i);
    Qi.bottomRows(n - 1 - i) = ctx.Q.bottomRows(n - 1 - i);
    yi.head(i) = ctx.y_gamma.head(i);
    yi.tail(n - 1 - i) = ctx.y_gamma.tail(n - 1 - i);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(Qi.transpose() * Qi / dn1);
    const VectorXd nu = es.eigenvalues().reverse();
    const MatrixXd phi = es.eigenvectors().rowwise().reverse();
    const VectorXd qy = Qi.transpose() * yi / dn1;
    const VectorXd qi = ctx.Q.row(i).transpose();
    double pred = 0.0;
    for (Index j = 0; j < nu.size() && nu(j) > 1e-12 * nu(0); ++j) {
      // P_{-i} = Q_{-i} Σ_j (q_j/ν_j) φ_j φ_j′ Q_{-i}′/(n − 1), evaluated at row i.
      const double g = q_weight(sc, nu(j), j + 1) / nu(j);
      pred += g * qi.dot(phi.col(j)) * phi.col(j).dot(qy);
    }
    const double r = ctx.y_gamma(i) - pred;
    total += r * r;
  }
  return total / static_cast<double>(n);
}

double criterion_value(const SelectionContext& ctx, const RegularizedProjector& P, Criterion c,
                       bool literal_loo) {
  const double dn = static_cast<double>(ctx.n);
  const double tp = P.trace();
  switch (c) {
    case Criterion::Cp: return residual_sq(ctx, P.q()) / dn + 2.0 * ctx.sigma2_v * tp / dn;
    case Criterion::GCV: {
      if (!(tp < dn)) throw InputError("GCV undefined: tr(P) >= n");
      const double d = 1.0 - tp / dn;
      return residual_sq(ctx, P.q()) / dn / (d * d);
    }
    case Criterion::LOO: return literal_loo ? loo_literal(ctx, P.scheme()) : loo_identity(ctx, P);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double s_hat(const SelectionContext& ctx, const RegularizedProjector& P, double criterion) {
  const double dn = static_cast<double>(ctx.n);
  const double tp = P.trace();
  // The printed scale σ̂²(trP)²ι′D̃′D̃ι/n is normalized by one more factor of n.
  const double penalty =
      ctx.sigma2 * tp * tp / dn * ctx.gamma1 * ctx.gamma1 * ctx.d_iota_sq / dn;
  return ctx.sigma2 * (criterion - ctx.sigma2_v * P.trace_squared() / dn + penalty);
}

SelectionResult select_alpha(const SelectionContext& ctx, SchemeKind kind,
                             const SelectionConfig& config) {
  std::vector<double> grid =
      config.grid.empty() ? default_grid(kind, ctx.spectrum->rank(), ctx.k) : config.grid;
  if (grid.empty()) throw InputError("selection grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw InputError("selection grid must be strictly increasing");
  }
  // T: larger α regularizes more; LF/PC: fewer iterations/components do.
  const bool prefer_later = kind == SchemeKind::Tikhonov;

  SelectionResult out{kind, std::numeric_limits<double>::quiet_NaN(), 0, {}, Scheme{}};
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CurvePoint pt{grid[i], std::numeric_limits<double>::quiet_NaN(),
                  std::numeric_limits<double>::quiet_NaN()};
    try {
      const RegularizedProjector P(ctx.spectrum, make_scheme(kind, grid[i], config.lf_c));
      pt.criterion = criterion_value(ctx, P, config.criterion, config.literal_loo);
      pt.s_hat = s_hat(ctx, P, pt.criterion);
      if (std::isfinite(pt.s_hat) &&
          (!found || pt.s_hat < best || (prefer_later && pt.s_hat == best))) {
        best = pt.s_hat;
        out.index = i;
        out.alpha_star = grid[i];
        out.scheme = P.scheme();
        found = true;
      }
    } catch (const InputError&) {
      // point left as NaN in the curve
    }
    out.curve.push_back(pt);
  }
  if (!found) throw NumericalError("selection curve has no finite value");
  return out;
}

void write_curve_csv(std::ostream& os, const SelectionResult& r) {
  auto fmt = [](double v) -> std::string {
    if (!std::isfinite(v)) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
  };
  os << "alpha,criterion,S_hat\n";
  for (const auto& p : r.curve) os << fmt(p.alpha) << "," << fmt(p.criterion) << "," << fmt(p.s_hat) << "\n";
}

}  // namespace netreg
