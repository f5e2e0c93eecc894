#include "netreg/identification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>

#include "netreg/errors.hpp"

namespace netreg {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::NotIdentified: return "NotIdentified";
    case Verdict::PossiblyIdentified: return "PossiblyIdentified";
    case Verdict::Identified: return "Identified";
    case Verdict::WeaklyIdentified: return "WeaklyIdentified";
  }
  return "?";
}

namespace {

void require_symmetric(const MatrixXd& W) {
  if (W.rows() != W.cols()) throw InputError("W is not square");
  if (W.size() == 0) return;
  const double asym = (W - W.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", asym);
    throw InputError(std::string("W is not symmetric (max |W - W'| = ") + buf +
                     "); identification diagnostics apply only to symmetric networks");
  }
}

DistinctEigenvalues cluster(std::vector<double> ev, double tol) {
  DistinctEigenvalues out;
  if (ev.empty()) return out;
  std::sort(ev.begin(), ev.end(), std::greater<>());
  double vmax = 0.0;
  for (double v : ev) vmax = std::max(vmax, std::abs(v));
  const double gap = tol * std::max(1.0, vmax);
  double sum = ev[0];
  Index mult = 1;
  for (std::size_t i = 1; i < ev.size(); ++i) {
    if (ev[i - 1] - ev[i] > gap) {
      out.clusters.push_back({sum / static_cast<double>(mult), mult});
      sum = 0.0;
      mult = 0;
    }
    sum += ev[i];
    ++mult;
  }
  out.clusters.push_back({sum / static_cast<double>(mult), mult});
  out.count = static_cast<Index>(out.clusters.size());
  return out;
}

void append_eigenvalues(const MatrixXd& A, std::vector<double>& ev) {
  if (A.size() == 0) return;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue decomposition failed");
  for (Index i = 0; i < es.eigenvalues().size(); ++i) ev.push_back(es.eigenvalues()(i));
}

}  // namespace

DistinctEigenvalues distinct_eigenvalues(const MatrixXd& W, double tol) {
  require_symmetric(W);
  std::vector<double> ev;
  append_eigenvalues(W, ev);
  return cluster(std::move(ev), tol);
}

DistinctEigenvalues distinct_eigenvalues(const BlockDiagonal& W, double tol) {
  std::vector<double> ev;
  ev.reserve(static_cast<std::size_t>(W.size()));
  for (std::size_t r = 0; r < W.block_count(); ++r) {
    require_symmetric(W.block(r));
    append_eigenvalues(W.block(r), ev);
  }
  return cluster(std::move(ev), tol);
}

Verdict proposition1_check(const MatrixXd& W, double tol) {
  return distinct_eigenvalues(W, tol).count <= 2 ? Verdict::NotIdentified
                                                 : Verdict::PossiblyIdentified;
}

Verdict proposition1_check(const BlockDiagonal& W, double tol) {
  return distinct_eigenvalues(W, tol).count <= 2 ? Verdict::NotIdentified
                                                 : Verdict::PossiblyIdentified;
}

RankCheck rank_check(const MatrixXd& Q) {
  RankCheck out;
  out.columns = Q.cols();
  if (Q.cols() == 0 || Q.rows() == 0) throw InputError("rank check on an empty stack");
  Eigen::JacobiSVD<MatrixXd> svd(Q);
  const VectorXd& s = svd.singularValues();
  const double smax = s(0);
  for (Index j = 0; j < s.size(); ++j) {
    if (s(j) > 1e-10 * smax) ++out.rank;
  }
  out.full_rank = smax > 0.0 && out.rank == Q.cols();
  const double smin = Q.cols() <= Q.rows() ? s(s.size() - 1) : 0.0;
  out.condition_number = (out.full_rank && smin > 0.0)
                             ? (smax / smin) * (smax / smin)
                             : std::numeric_limits<double>::infinity();
  return out;
}

RankCheck proposition2_rank_check(const GroupedNetwork& net, const MatrixXd& X, bool rho_zero,
                                  Index distinct_count) {
  if (X.cols() == 0) throw InputError("proposition2_rank_check: X has no columns");
  if (X.rows() != net.size()) throw InputError("X rows do not match network order");
  const Index powers = std::max<Index>(distinct_count - 1, 1);
  std::vector<MatrixXd> parts;
  MatrixXd WjX = X;
  for (Index j = 1; j <= powers; ++j) {
    WjX = net.W.apply(WjX);
    parts.push_back(WjX);
  }
  if (!rho_zero) {
    const Index g = net.group_count();
    MatrixXd iota = MatrixXd::Zero(net.size(), g);
    for (Index r = 0; r < g; ++r) {
      iota.block(net.W.offset(static_cast<std::size_t>(r)), r, net.group_sizes[r], 1).setOnes();
    }
    MatrixXd Wji = iota;
    for (Index j = 1; j <= powers; ++j) {
      Wji = net.W.apply(Wji);
      parts.push_back(Wji);
    }
  }
  parts.push_back(X);
  Index cols = 0;
  for (const auto& p : parts) cols += p.cols();
  MatrixXd Q0(net.size(), cols);
  Index c = 0;
  for (const auto& p : parts) {
    Q0.middleCols(c, p.cols()) = p;
    c += p.cols();
  }
  if (rho_zero) return rank_check(Q0);
  MatrixXd Q(net.size(), 2 * cols);
  Q << Q0, net.M.apply(Q0);
  return rank_check(Q);
}

RankCheck proposition2_rank_check(const GroupedNetwork& net, const MatrixXd& X, bool rho_zero,
                                  double tol) {
  return proposition2_rank_check(net, X, rho_zero, distinct_eigenvalues(net.W, tol).count);
}

double lee_reduced_coefficient(Index m_r, double lambda, double beta1, double beta2) {
  if (m_r < 2) throw InputError("group size must be at least 2");
  const double mm1 = static_cast<double>(m_r - 1);
  const double denom = mm1 + lambda;
  if (std::abs(denom) < 1e-14) throw NumericalError("m_r - 1 + lambda is zero", std::numeric_limits<double>::infinity());
  return (mm1 * beta1 - beta2) / denom;
}

BlockDiagonal lee_block_matrix(const std::vector<Index>& group_sizes) {
  std::vector<MatrixXd> blocks;
  for (Index m : group_sizes) {
    if (m < 2) throw InputError("Lee groups need at least 2 members");
    MatrixXd b = MatrixXd::Constant(m, m, 1.0 / static_cast<double>(m - 1));
    b.diagonal().setZero();
    blocks.push_back(std::move(b));
  }
  return BlockDiagonal(std::move(blocks));
}

IdentificationReport diagnose(const GroupedNetwork& net, const MatrixXd& X, bool rho_zero,
                              double tol) {
  IdentificationReport rep;
  rep.eigen = distinct_eigenvalues(net.W, tol);
  if (rep.eigen.count <= 2) {
    rep.verdict = Verdict::NotIdentified;
    rep.note = "at most two distinct eigenvalues";
  } else {
    rep.verdict = Verdict::PossiblyIdentified;
  }
  if (X.cols() > 0) {
    rep.stack = proposition2_rank_check(net, X, rho_zero, rep.eigen.count);
    if (rep.verdict != Verdict::NotIdentified) {
      if (!rep.stack->full_rank) {
        rep.verdict = Verdict::NotIdentified;
        rep.note = "instrument stack is rank-deficient";
      } else if (rep.stack->condition_number > kWeakIdentificationThreshold) {
        rep.verdict = Verdict::WeaklyIdentified;
        rep.note = "Gram condition number exceeds the engineering threshold 1e6";
      } else {
        rep.verdict = Verdict::Identified;
      }
    }
  } else if (rep.verdict == Verdict::PossiblyIdentified) {
    rep.note = "no regressors supplied; rank condition not checked";
  }
  return rep;
}

namespace {

std::string fmt(double v) {
  if (!std::isfinite(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void IdentificationReport::print_text(std::ostream& os) const {
  os << to_string(verdict) << " (" << eigen.count << " distinct eigenvalues)\n";
  os << "eigenvalue clusters (value x multiplicity):\n";
  for (const auto& c : eigen.clusters) os << "  " << fmt(c.value) << " x " << c.multiplicity << "\n";
  if (stack) {
    os << "instrument stack: rank " << stack->rank << " of " << stack->columns << " columns"
       << (stack->full_rank ? " (full)" : " (deficient)") << "\n";
    os << "gram condition number: " << fmt(stack->condition_number) << "\n";
  }
  if (!note.empty()) os << "note: " << note << "\n";
}

void IdentificationReport::print_kv(std::ostream& os) const {
  os << "verdict=" << to_string(verdict) << "\n";
  os << "distinct_eigenvalue_count=" << eigen.count << "\n";
  for (std::size_t i = 0; i < eigen.clusters.size(); ++i) {
    os << "cluster." << i << "=" << fmt(eigen.clusters[i].value) << ":"
       << eigen.clusters[i].multiplicity << "\n";
  }
  if (stack) {
    os << "rank_flag=" << (stack->full_rank ? 1 : 0) << "\n";
    os << "stack_rank=" << stack->rank << "\n";
    os << "stack_columns=" << stack->columns << "\n";
    os << "stack_condition_number=" << fmt(stack->condition_number) << "\n";
  }
  os << "weak_identification_threshold=" << fmt(kWeakIdentificationThreshold) << "\n";
}

}  // namespace netreg
