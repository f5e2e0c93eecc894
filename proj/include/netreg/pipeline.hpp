#pragma once

#include <optional>
#include <vector>

#include "netreg/estimation.hpp"
#include "netreg/instruments.hpp"
#include "netreg/selection.hpp"

namespace netreg {

/// End-to-end estimation on observed data: preliminary δ̃ (instruments
/// J[X, WX, MX, MWX]), ρ̃ by moments, the instrument set, α by the selection
/// rule (unless fixed), then regularized 2SLS.
struct PipelineOptions {
  SchemeKind scheme = SchemeKind::Tikhonov;
  Criterion criterion = Criterion::Cp;
  std::optional<double> parameter;  // fixed α / iterations / components; skips selection
  std::vector<double> grid;         // empty: default grid
  VectorXd gamma_bar;               // empty: e₁
  /// Highest power of W; 0 picks min(ϱ − 1, 10) when W is symmetric, else 10.
  Index order = 0;
  bool include_bonacich = false;
  bool include_m_lags = false;
  Normalization normalization = Normalization::UnitVariance;
  bool literal_loo = false;
  double eigen_tol = 1e-8;
};

struct PipelineOutput {
  EstimationResult result;
  std::optional<SelectionResult> selection;
  InstrumentSet instruments;
  RhoEstimate rho;
  VectorXd delta_tilde;
  Index order = 0;
};

PipelineOutput run_pipeline(const GroupedNetwork& net, const PanelData& data,
                            const PipelineOptions& opt);

}  // namespace netreg
