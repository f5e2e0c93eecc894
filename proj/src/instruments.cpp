#include "netreg/instruments.hpp"

#include <cmath>

#include "netreg/errors.hpp"

namespace netreg {

const char* to_string(Normalization n) {
  switch (n) {
    case Normalization::None: return "none";
    case Normalization::UnitVariance: return "unit-variance";
    case Normalization::Standardized: return "standardized";
  }
  return "?";
}

MatrixXd group_indicators(const GroupedNetwork& net) {
  const Index g = net.group_count();
  MatrixXd iota = MatrixXd::Zero(net.size(), g);
  for (Index r = 0; r < g; ++r) {
    iota.block(net.W.offset(static_cast<std::size_t>(r)), r, net.group_sizes[r], 1).setOnes();
  }
  return iota;
}

InstrumentSet drop_zero_columns(InstrumentSet set) {
  if (set.Q.cols() == 0) return set;
  const VectorXd norms = set.Q.colwise().norm();
  const double cutoff = 1e-10 * norms.maxCoeff();
  std::vector<Index> keep;
  for (Index j = 0; j < set.Q.cols(); ++j) {
    if (norms(j) > cutoff && norms(j) > 0.0) {
      keep.push_back(j);
    } else {
      set.dropped.push_back(set.labels[static_cast<std::size_t>(j)]);
    }
  }
  if (static_cast<Index>(keep.size()) == set.Q.cols()) return set;
  MatrixXd Q(set.Q.rows(), static_cast<Index>(keep.size()));
  std::vector<std::string> labels;
  for (std::size_t c = 0; c < keep.size(); ++c) {
    Q.col(static_cast<Index>(c)) = set.Q.col(keep[c]);
    labels.push_back(set.labels[static_cast<std::size_t>(keep[c])]);
  }
  set.Q = std::move(Q);
  set.labels = std::move(labels);
  return set;
}

namespace {

void append(MatrixXd& Q, std::vector<std::string>& labels, const MatrixXd& block,
            const std::string& prefix, const std::vector<std::string>& names) {
  const Index c0 = Q.cols();
  Q.conservativeResize(block.rows(), c0 + block.cols());
  Q.middleCols(c0, block.cols()) = block;
  for (Index j = 0; j < block.cols(); ++j) {
    labels.push_back(prefix + names[static_cast<std::size_t>(j)]);
  }
}

std::vector<std::string> numbered(const std::string& stem, Index count) {
  std::vector<std::string> out;
  for (Index j = 0; j < count; ++j) out.push_back(stem + std::to_string(j + 1));
  return out;
}

}  // namespace

InstrumentSet build_instruments(const GroupedNetwork& net, const BlockDiagonal& J,
                                const MatrixXd& X, const std::vector<std::string>& names,
                                const InstrumentOptions& opt) {
  if (opt.order < 1) throw InputError("instrument order must be at least 1");
  if (X.rows() != net.size()) throw InputError("X rows do not match network order");
  const std::vector<std::string> xnames =
      static_cast<Index>(names.size()) == X.cols() ? names : numbered("x", X.cols());

  MatrixXd Q0(net.size(), 0);
  std::vector<std::string> labels;
  MatrixXd WjX = X;
  for (Index j = 1; j <= opt.order; ++j) {
    WjX = net.W.apply(WjX);
    append(Q0, labels, WjX, j == 1 ? "W*" : "W^" + std::to_string(j) + "*", xnames);
  }
  if (opt.include_bonacich) {
    MatrixXd iota = opt.bonacich_per_group ? group_indicators(net)
                                           : MatrixXd(MatrixXd::Ones(net.size(), 1));
    const auto inames = opt.bonacich_per_group ? numbered("iota_g", iota.cols())
                                               : std::vector<std::string>{"iota"};
    for (Index j = 1; j <= opt.order; ++j) {
      iota = net.W.apply(iota);
      append(Q0, labels, iota, j == 1 ? "W*" : "W^" + std::to_string(j) + "*", inames);
    }
  }
  append(Q0, labels, X, "", xnames);

  InstrumentSet set;
  if (opt.include_m_lags) {
    const std::vector<std::string> base = labels;
    set.Q.resize(net.size(), 2 * Q0.cols());
    set.Q << Q0, net.M.apply(Q0);
    set.labels = base;
    for (const auto& l : base) set.labels.push_back("M*" + l);
  } else {
    set.Q = std::move(Q0);
    set.labels = std::move(labels);
  }
  set.Q = J.apply(set.Q);
  for (auto& l : set.labels) l = "J*" + l;
  return drop_zero_columns(std::move(set));
}

InstrumentSet normalize_columns(const InstrumentSet& set, Normalization mode) {
  if (set.Q.cols() == 0) throw InputError("cannot normalize an empty instrument set");
  if (mode == Normalization::None) return set;
  const Index n = set.Q.rows();
  if (n < 2) throw InputError("normalization needs at least two rows");
  InstrumentSet out;
  out.normalization = mode;
  out.dropped = set.dropped;
  std::vector<Index> keep;
  std::vector<double> scale;
  const VectorXd mean = set.Q.colwise().mean();
  for (Index j = 0; j < set.Q.cols(); ++j) {
    const VectorXd c = set.Q.col(j).array() - mean(j);
    const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(n - 1));
    const double mag = set.Q.col(j).cwiseAbs().maxCoeff();
    if (sd > 1e-12 * std::max(1.0, mag)) {
      keep.push_back(j);
      scale.push_back(sd);
    } else {
      out.dropped.push_back(set.labels[static_cast<std::size_t>(j)]);
    }
  }
  out.Q.resize(n, static_cast<Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    const Index j = keep[c];
    if (mode == Normalization::Standardized) {
      out.Q.col(static_cast<Index>(c)) = (set.Q.col(j).array() - mean(j)) / scale[c];
    } else {
      out.Q.col(static_cast<Index>(c)) = set.Q.col(j) / scale[c];
    }
    out.labels.push_back(set.labels[static_cast<std::size_t>(j)]);
  }
  return out;
}

InstrumentSet mc_q1(const GroupedNetwork& net, const BlockDiagonal& J, const VectorXd& x1,
                    const VectorXd& x2) {
  const Index n = net.size();
  if (x1.size() != n || x2.size() != n) throw InputError("regressor length does not match network");
  MatrixXd x(n, 2);
  x << x1, x2;
  const MatrixXd Wx = net.W.apply(x);
  InstrumentSet set;
  set.Q.resize(n, 8);
  set.Q << x, Wx, net.M.apply(x), net.M.apply(Wx);
  set.labels = {"J*x1", "J*x2", "J*W*x1", "J*W*x2", "J*M*x1", "J*M*x2", "J*M*W*x1", "J*M*W*x2"};
  set.Q = J.apply(set.Q);
  return drop_zero_columns(std::move(set));
}

InstrumentSet mc_q2(const GroupedNetwork& net, const BlockDiagonal& J, const InstrumentSet& q1) {
  if (q1.rows() != net.size()) throw InputError("Q1 rows do not match network order");
  const MatrixXd B = J.apply(net.W.apply(group_indicators(net)));
  InstrumentSet bon;
  bon.Q = B;
  bon.labels = numbered("J*W*iota_g", B.cols());
  bon = drop_zero_columns(std::move(bon));
  InstrumentSet set;
  set.Q.resize(net.size(), q1.cols() + bon.cols());
  set.Q << q1.Q, bon.Q;
  set.labels = q1.labels;
  set.labels.insert(set.labels.end(), bon.labels.begin(), bon.labels.end());
  set.dropped = q1.dropped;
  set.dropped.insert(set.dropped.end(), bon.dropped.begin(), bon.dropped.end());
  return set;
}

}  // namespace netreg
