#include "netreg/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <thread>

#include "netreg/errors.hpp"
#include "netreg/graphs.hpp"
#include "netreg/instruments.hpp"
#include "netreg/rng.hpp"
#include "netreg/transforms.hpp"

namespace netreg {

void McConfig::validate() const {
  if (group_count < 1) throw InputError("group count must be positive");
  if (group_size < 2) throw InputError("group size must be at least 2");
  if (replications < 1) throw InputError("replications must be at least 1");
  if (max_links < 0 || max_links >= group_size) {
    throw InputError("max_links must lie in [0, group_size)");
  }
  if (!(sigma2 >= 0.0)) throw InputError("sigma2 must be nonnegative");
  if (!(gamma_sd >= 0.0)) throw InputError("gamma_sd must be nonnegative");
  if (!(std::abs(lambda) * static_cast<double>(max_links) < 1.0)) {
    throw InputError("|lambda| * max_links must be below 1 for a stable reduced form");
  }
  if (!(std::abs(rho) < 1.0)) throw InputError("|rho| must be below 1");
}

VectorXd McConfig::truth() const { return Eigen::Vector3d(lambda, beta1, beta2); }

const char* to_string(Estimator e) {
  switch (e) {
    case Estimator::FiniteIV: return "2SLS (finite iv)";
    case Estimator::LargeIV: return "2SLS (large iv)";
    case Estimator::BiasCorrected: return "Bias-corrected 2SLS";
    case Estimator::T: return "T-2SLS";
    case Estimator::LF: return "LF-2SLS";
    case Estimator::PC: return "PC-2SLS";
  }
  return "?";
}

int default_thread_count() {
  if (const char* env = std::getenv("NETREG_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

template <class F>
void record(ReplicationResult& out, Estimator e, F&& f) {
  const auto i = static_cast<std::size_t>(e);
  try {
    out.delta[i] = f();
  } catch (const std::exception& ex) {
    out.error[i] = ex.what();
  }
}

}  // namespace

McDraw draw_replication(const McConfig& config, std::uint64_t replication) {
  config.validate();
  Rng rng(Rng::substream_seed(config.seed, replication));
  McDraw d;
  d.net = generate_mc_network(config.group_count, config.group_size, config.max_links, rng);
  const Index n = d.net.size();
  VectorXd x1(n), x2(n), gamma(config.group_count), eps(n);
  for (Index i = 0; i < n; ++i) x1(i) = rng.normal();
  if (config.contextual == Contextual::Independent) {
    for (Index i = 0; i < n; ++i) x2(i) = rng.normal();
  } else {
    x2 = x1;
  }
  for (Index r = 0; r < config.group_count; ++r) gamma(r) = rng.normal(0.0, config.gamma_sd);
  const double sd = std::sqrt(config.sigma2);
  for (Index i = 0; i < n; ++i) eps(i) = rng.normal(0.0, sd);

  ModelParams p;
  p.lambda = config.lambda;
  p.rho = config.rho;
  p.beta1 = VectorXd::Constant(1, config.beta1);
  p.beta2 = VectorXd::Constant(1, config.beta2);
  p.gamma = gamma;
  d.data.x1 = x1;
  d.data.x2 = x2;
  d.data.x1_names = {"x1"};
  d.data.x2_names = {"x2"};
  d.data.y = reduced_form(p, d.data.x1, d.data.x2, eps, d.net);
  return d;
}

ReplicationResult run_replication(const McConfig& config, std::uint64_t replication) {
  ReplicationResult out;
  VectorXd delta_tilde;
  double rho_tilde = 0.0;
  std::unique_ptr<EstimationProblem> prob;
  InstrumentSet q1, q2;
  try {
    McDraw draw = draw_replication(config, replication);
    prob = std::make_unique<EstimationProblem>(draw.net, std::move(draw.data));
    const GroupedNetwork& net = prob->network();
    q1 = mc_q1(net, prob->J(), prob->data().x1.col(0), prob->data().x2.col(0));
    q2 = mc_q2(net, prob->J(), q1);
    delta_tilde = preliminary_delta(*prob, q1);
    rho_tilde = preliminary_rho(*prob, delta_tilde).rho;
    out.rho_tilde = rho_tilde;
  } catch (const std::exception& ex) {
    for (auto& e : out.error) e = std::string("preliminary stage: ") + ex.what();
    return out;
  }

  record(out, Estimator::FiniteIV, [&] { return classical_2sls(*prob, q1, rho_tilde).delta; });

  std::shared_ptr<const Spectrum> spec2;
  try {
    spec2 = std::make_shared<const Spectrum>(Spectrum::from_instruments(q2.Q));
  } catch (const std::exception& ex) {
    for (std::size_t i = 1; i < kEstimatorCount; ++i) out.error[i] = ex.what();
    return out;
  }
  const RegularizedProjector P2(spec2, Scheme::full_projection());
  record(out, Estimator::LargeIV, [&] { return regularized_2sls(*prob, P2, rho_tilde).delta; });
  record(out, Estimator::BiasCorrected,
         [&] { return bias_corrected_2sls(*prob, P2, delta_tilde, rho_tilde).delta; });

  std::optional<SelectionContext> ctx;
  std::string ctx_error;
  try {
    const InstrumentSet qn = normalize_columns(q2, Normalization::UnitVariance);
    auto specn = std::make_shared<const Spectrum>(Spectrum::from_instruments(qn.Q));
    ctx = prepare_selection(*prob, specn, qn.Q, delta_tilde, rho_tilde, VectorXd());
  } catch (const std::exception& ex) {
    ctx_error = ex.what();
  }
  SelectionConfig sel;
  sel.criterion = config.criterion;
  const std::array<std::pair<Estimator, SchemeKind>, 3> regs = {
      std::pair{Estimator::T, SchemeKind::Tikhonov},
      std::pair{Estimator::LF, SchemeKind::LandweberFridman},
      std::pair{Estimator::PC, SchemeKind::PrincipalComponents}};
  for (std::size_t s = 0; s < regs.size(); ++s) {
    const auto [est, kind] = regs[s];
    if (!ctx) {
      out.error[static_cast<std::size_t>(est)] = ctx_error;
      continue;
    }
    record(out, est, [&, kind = kind, s = s] {
      const SelectionResult r = select_alpha(*ctx, kind, sel);
      const RegularizedProjector P(ctx->spectrum, r.scheme);
      VectorXd d = regularized_2sls(*prob, P, rho_tilde).delta;
      out.alpha[s] = r.alpha_star;
      return d;
    });
  }
  return out;
}

McResults run_experiment(const McConfig& config,
                         const std::function<void(Index done, Index total)>& progress) {
  config.validate();
  McResults res;
  res.config = config;
  const Index total = config.replications;
  res.reps.resize(static_cast<std::size_t>(total));
  const int threads =
      std::max(1, std::min<int>(config.threads > 0 ? config.threads : default_thread_count(),
                                static_cast<int>(total)));
  std::atomic<Index> next{0};
  std::atomic<Index> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (Index r = next++; r < total; r = next++) {
      res.reps[static_cast<std::size_t>(r)] = run_replication(config, static_cast<std::uint64_t>(r));
      const Index d = ++done;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(d, total);
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return res;
}

CellSummary summarize_values(std::vector<double> values, double truth, Index failures) {
  CellSummary c;
  c.count = static_cast<Index>(values.size());
  c.failures = failures;
  if (values.size() < 2) return c;
  std::sort(values.begin(), values.end());
  const double R = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  c.mean = sum / R;
  double ss = 0.0, se = 0.0;
  for (double v : values) {
    ss += (v - c.mean) * (v - c.mean);
    se += (v - truth) * (v - truth);
  }
  c.sd = std::sqrt(ss / (R - 1.0));
  c.rmse = std::sqrt(se / R);
  return c;
}

McSummary summarize(const McResults& results) {
  McSummary s;
  s.config = results.config;
  const VectorXd truth = results.config.truth();
  for (std::size_t e = 0; e < kEstimatorCount; ++e) {
    Index failures = 0;
    std::array<std::vector<double>, 3> vals;
    for (const auto& r : results.reps) {
      if (!r.delta[e]) {
        ++failures;
        continue;
      }
      for (int j = 0; j < 3; ++j) vals[j].push_back((*r.delta[e])(j));
    }
    s.failures[e] = failures;
    for (int j = 0; j < 3; ++j) s.cells[e][j] = summarize_values(vals[j], truth(j), failures);
  }
  std::vector<double> rhos;
  Index rho_fail = 0;
  for (const auto& r : results.reps) {
    if (r.rho_tilde) rhos.push_back(*r.rho_tilde);
    else ++rho_fail;
  }
  s.rho = summarize_values(rhos, results.config.rho, rho_fail);

  const auto lf = static_cast<std::size_t>(Estimator::LF);
  const auto pc = static_cast<std::size_t>(Estimator::PC);
  Index both = 0, agree = 0;
  for (const auto& r : results.reps) {
    if (r.delta[lf] && r.delta[pc]) {
      ++both;
      if (std::abs((*r.delta[lf])(0) - (*r.delta[pc])(0)) < 1e-6) ++agree;
    }
  }
  if (both > 0) s.lf_pc_agreement = static_cast<double>(agree) / static_cast<double>(both);

  for (int a = 0; a < 3; ++a) {
    std::vector<double> v;
    for (const auto& r : results.reps) {
      if (std::isfinite(r.alpha[a])) v.push_back(r.alpha[a]);
    }
    if (v.empty()) {
      s.median_alpha[a] = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    s.median_alpha[a] = v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  }
  return s;
}

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string cell_text(const CellSummary& c) {
  if (c.empty()) return "-";
  return num(c.mean) + " (" + num(c.sd) + ") [" + num(c.rmse) + "]";
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s + " " : s + std::string(w - s.size(), ' ');
}

}  // namespace

void write_summary_text(std::ostream& os, const McSummary& s) {
  const McConfig& c = s.config;
  os << "m=" << c.group_size << "  g=" << c.group_count << "  max_links=" << c.max_links
     << "  replications=" << c.replications << "  seed=" << c.seed << "\n";
  os << "Mean (SD) [RMSE]\n";
  constexpr std::size_t w0 = 22, w = 36;
  os << pad("", w0) << pad("lambda_0=" + num(c.lambda), w) << pad("beta1_0=" + num(c.beta1), w)
     << pad("beta2_0=" + num(c.beta2), w) << "rho_0=" << num(c.rho) << "\n";
  for (std::size_t e = 0; e < kEstimatorCount; ++e) {
    os << pad(to_string(kEstimators[e]), w0);
    for (int j = 0; j < 3; ++j) os << pad(cell_text(s.cells[e][j]), w);
    os << (e == 0 ? cell_text(s.rho) : std::string("-")) << "\n";
  }
  os << "failures:";
  for (std::size_t e = 0; e < kEstimatorCount; ++e) {
    os << " " << to_string(kEstimators[e]) << "=" << s.failures[e] << (e + 1 < kEstimatorCount ? "," : "");
  }
  os << "\n";
  os << "LF/PC lambda agreement rate: " << num(s.lf_pc_agreement) << "\n";
  os << "median selected parameter: T alpha=" << num(s.median_alpha[0])
     << ", LF iterations=" << num(s.median_alpha[1]) << ", PC components=" << num(s.median_alpha[2])
     << "\n";
}

void write_summary_csv(std::ostream& os, const McSummary& s) {
  os << "estimator,parameter,truth,mean,sd,rmse,count,failures\n";
  const VectorXd truth = s.config.truth();
  const char* params[3] = {"lambda", "beta1", "beta2"};
  auto row = [&](const std::string& est, const std::string& par, double t, const CellSummary& c) {
    os << '"' << est << '"' << "," << par << "," << num(t) << "," << num(c.mean) << ","
       << num(c.sd) << "," << num(c.rmse) << "," << c.count << "," << c.failures << "\n";
  };
  for (std::size_t e = 0; e < kEstimatorCount; ++e) {
    for (int j = 0; j < 3; ++j) row(to_string(kEstimators[e]), params[j], truth(j), s.cells[e][j]);
  }
  row("preliminary", "rho", s.config.rho, s.rho);
}

}  // namespace netreg
