#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "netreg/block_diagonal.hpp"
#include "netreg/graphs.hpp"
#include "netreg/selection.hpp"

namespace netreg {

/// How the contextual regressor is drawn: an independent N(0, 1) column
/// (default) or the same column as the own regressor.
enum class Contextual { Independent, Same };

struct McConfig {
  Index group_count = 30;
  Index group_size = 10;
  Index max_links = 3;
  Index replications = 500;
  std::uint64_t seed = 42;
  double lambda = 0.1;
  double rho = 0.1;
  double beta1 = 0.2;
  double beta2 = 0.2;
  double gamma_sd = 0.1;  // group effects ~ N(0, 0.01)
  double sigma2 = 1.0;
  Contextual contextual = Contextual::Independent;
  Criterion criterion = Criterion::Cp;
  /// Worker threads; 0 reads NETREG_THREADS, falling back to the hardware count.
  int threads = 0;

  void validate() const;
  VectorXd truth() const;  // (λ, β₁, β₂)
};

enum class Estimator { FiniteIV, LargeIV, BiasCorrected, T, LF, PC };
inline constexpr std::size_t kEstimatorCount = 6;
inline constexpr std::array<Estimator, kEstimatorCount> kEstimators = {
    Estimator::FiniteIV, Estimator::LargeIV, Estimator::BiasCorrected,
    Estimator::T,        Estimator::LF,      Estimator::PC};

const char* to_string(Estimator e);

struct ReplicationResult {
  std::array<std::optional<VectorXd>, kEstimatorCount> delta;
  std::array<std::string, kEstimatorCount> error;
  std::optional<double> rho_tilde;
  /// Selected parameter for T, LF, PC (NaN when the estimator failed).
  std::array<double, 3> alpha{std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN(),
                              std::numeric_limits<double>::quiet_NaN()};
};

struct McDraw {
  GroupedNetwork net;
  PanelData data;  // x1, x2 (one column each) and Y from the reduced form
};

/// Data of replication `replication`: substream substream_seed(seed, r), draw
/// order network, x₁, x₂, γ, ε.
McDraw draw_replication(const McConfig& config, std::uint64_t replication);

/// One draw of (W, X, γ, ε) from substream `replication` of the master seed,
/// followed by all six estimators on the common data. Draw order: network,
/// x₁, x₂, γ, ε. Estimator failures are recorded, never thrown.
ReplicationResult run_replication(const McConfig& config, std::uint64_t replication);

struct McResults {
  McConfig config;
  std::vector<ReplicationResult> reps;  // in replication order
};

/// Runs all replications (concurrently when threads > 1); the output order
/// is the replication order regardless of scheduling.
McResults run_experiment(const McConfig& config,
                         const std::function<void(Index done, Index total)>& progress = {});

struct CellSummary {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double sd = std::numeric_limits<double>::quiet_NaN();
  double rmse = std::numeric_limits<double>::quiet_NaN();
  Index count = 0;
  Index failures = 0;
  bool empty() const { return count < 2; }
};

/// Mean, SD (divisor R − 1) and RMSE around `truth`. Fewer than two values
/// leave the cell empty. Values are sorted before accumulation, so the result
/// does not depend on their order.
CellSummary summarize_values(std::vector<double> values, double truth, Index failures = 0);

struct McSummary {
  McConfig config;
  /// rows: estimators; columns: λ, β₁, β₂.
  std::array<std::array<CellSummary, 3>, kEstimatorCount> cells;
  CellSummary rho;  // shared preliminary ρ̃
  std::array<Index, kEstimatorCount> failures{};
  /// Share of replications where LF and PC both succeeded and their λ̂ agree
  /// within 1e-6.
  double lf_pc_agreement = std::numeric_limits<double>::quiet_NaN();
  std::array<double, 3> median_alpha{};
};

McSummary summarize(const McResults& results);

/// Aligned text table: Mean (SD) [RMSE], empty cells printed as "-".
void write_summary_text(std::ostream& os, const McSummary& s);
void write_summary_csv(std::ostream& os, const McSummary& s);

/// Thread count from the environment variable NETREG_THREADS, else the
/// hardware concurrency (at least 1).
int default_thread_count();

}  // namespace netreg
