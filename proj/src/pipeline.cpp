#include "netreg/pipeline.hpp"

#include <algorithm>

#include "netreg/errors.hpp"
#include "netreg/identification.hpp"

namespace netreg {

PipelineOutput run_pipeline(const GroupedNetwork& net, const PanelData& data,
                            const PipelineOptions& opt) {
  const EstimationProblem prob(net, data);
  PipelineOutput out;

  MatrixXd base(prob.n(), data.x1.cols() + data.x2.cols());
  base << data.x1, data.x2;
  std::vector<std::string> names = data.x1_names;
  names.insert(names.end(), data.x2_names.begin(), data.x2_names.end());

  std::optional<Index> distinct;
  if (net.W.max_abs_asymmetry() <= 1e-10) {
    distinct = distinct_eigenvalues(net.W, opt.eigen_tol).count;
  }
  out.order = opt.order > 0 ? opt.order
                            : (distinct ? std::clamp<Index>(*distinct - 1, 1, 10) : Index{10});

  InstrumentOptions prelim;
  prelim.order = 1;
  prelim.include_m_lags = true;
  const InstrumentSet q1 = build_instruments(net, prob.J(), base, names, prelim);
  out.delta_tilde = preliminary_delta(prob, q1);
  out.rho = preliminary_rho(prob, out.delta_tilde);
  const double rho = out.rho.rho;

  InstrumentOptions io;
  io.order = out.order;
  io.include_bonacich = opt.include_bonacich;
  io.include_m_lags = opt.include_m_lags;
  out.instruments = normalize_columns(build_instruments(net, prob.J(), base, names, io),
                                      opt.normalization);
  auto spectrum = std::make_shared<const Spectrum>(Spectrum::from_instruments(out.instruments.Q));

  Scheme scheme;
  if (opt.parameter) {
    scheme = make_scheme(opt.scheme, *opt.parameter);
  } else {
    const SelectionContext ctx = prepare_selection(prob, spectrum, out.instruments.Q,
                                                   out.delta_tilde, rho, opt.gamma_bar);
    SelectionConfig cfg;
    cfg.criterion = opt.criterion;
    cfg.grid = opt.grid;
    cfg.gamma_bar = opt.gamma_bar;
    cfg.literal_loo = opt.literal_loo;
    out.selection = select_alpha(ctx, opt.scheme, cfg);
    scheme = out.selection->scheme;
  }
  const RegularizedProjector P(spectrum, scheme);
  out.result = regularized_2sls(prob, P, rho);
  out.result.distinct_eigenvalues = distinct;
  if (out.rho.degenerate) {
    out.result.warnings.push_back("rho moment objective is flat; rho_tilde set to 0");
  }
  for (const auto& d : out.instruments.dropped) {
    out.result.warnings.push_back("dropped degenerate instrument column " + d);
  }
  if (!distinct) {
    out.result.warnings.push_back(
        "W is not symmetric; distinct-eigenvalue diagnostics skipped and order defaulted to 10");
  }
  return out;
}

}  // namespace netreg
