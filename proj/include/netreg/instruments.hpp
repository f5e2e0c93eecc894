#pragma once

#include <string>
#include <vector>

#include "netreg/block_diagonal.hpp"
#include "netreg/graphs.hpp"

namespace netreg {

enum class Normalization { None, UnitVariance, Standardized };

const char* to_string(Normalization n);

/// Finite instrument matrix with one label per column. Columns that vanish
/// numerically are removed at construction and their labels kept in `dropped`.
struct InstrumentSet {
  MatrixXd Q;
  std::vector<std::string> labels;
  Normalization normalization = Normalization::None;
  std::vector<std::string> dropped;

  Index rows() const noexcept { return Q.rows(); }
  Index cols() const noexcept { return Q.cols(); }
};

struct InstrumentOptions {
  Index order = 1;               // highest power m₁ of W
  bool include_bonacich = false; // W^j ι columns
  /// One W^j ι column per group (block ι) rather than a single pooled column.
  bool bonacich_per_group = true;
  bool include_m_lags = false;   // append the M-premultiplied copy
};

/// Q = J[Q₀, MQ₀] with Q₀ = [W^j X (j = 1..m₁), W^j ι (j = 1..m₁), X]; the
/// Bonacich and M-lagged parts are optional. J is applied last; numerically
/// zero columns are dropped.
InstrumentSet build_instruments(const GroupedNetwork& net, const BlockDiagonal& J,
                                const MatrixXd& X, const std::vector<std::string>& names,
                                const InstrumentOptions& opt);

/// Scales each column to unit sample variance (divisor n − 1); Standardized
/// demeans first. Zero-variance columns are dropped.
InstrumentSet normalize_columns(const InstrumentSet& set, Normalization mode);

/// Removes columns whose norm is below 1e-10 times the largest column norm
/// (or exactly zero).
InstrumentSet drop_zero_columns(InstrumentSet set);

/// Simulation roster Q₁ = J[x, Wx, Mx, MWx] over the raw variables x = (x₁, x₂).
InstrumentSet mc_q1(const GroupedNetwork& net, const BlockDiagonal& J, const VectorXd& x1,
                    const VectorXd& x2);
/// Simulation roster Q₂ = [Q₁, JWι_r for each group r].
InstrumentSet mc_q2(const GroupedNetwork& net, const BlockDiagonal& J, const InstrumentSet& q1);

/// n × G matrix of group indicators.
MatrixXd group_indicators(const GroupedNetwork& net);

}  // namespace netreg
