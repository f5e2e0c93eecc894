#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "netreg/errors.hpp"
#include "netreg/identification.hpp"
#include "netreg/io.hpp"
#include "netreg/montecarlo.hpp"
#include "netreg/pipeline.hpp"
#include "netreg/regularization.hpp"

namespace py = pybind11;
using namespace netreg;

namespace {

Scheme make_scheme(const std::string& kind, double parameter) {
  switch (parse_scheme_kind(kind)) {
    case SchemeKind::Tikhonov: return Scheme::tikhonov(parameter);
    case SchemeKind::LandweberFridman: return Scheme::landweber_fridman(static_cast<Index>(parameter));
    case SchemeKind::PrincipalComponents: return Scheme::principal_components(static_cast<Index>(parameter));
  }
  throw InputError("unknown scheme");
}

py::dict result_dict(const PipelineOutput& po) {
  const EstimationResult& r = po.result;
  py::dict d;
  d["estimator"] = r.estimator;
  d["names"] = r.names;
  d["delta"] = r.delta;
  d["std_errors"] = r.std_errors;
  d["rho_tilde"] = r.rho_tilde;
  d["sigma2_hat"] = r.sigma2_hat;
  d["alpha_star"] = r.alpha_star;
  d["tr_P"] = r.tr_P;
  d["tr_P2"] = r.tr_P2;
  d["condition_number"] = r.instrument_condition_number;
  d["normal_condition_number"] = r.normal_condition_number;
  d["order"] = po.order;
  d["instrument_labels"] = po.instruments.labels;
  d["warnings"] = r.warnings;
  if (po.selection) {
    py::list curve;
    for (const CurvePoint& p : po.selection->curve) curve.append(py::make_tuple(p.alpha, p.criterion, p.s_hat));
    d["curve"] = curve;
  } else {
    d["curve"] = py::none();
  }
  return d;
}

PipelineOptions options(const std::string& scheme, const std::string& criterion, std::optional<double> parameter,
                        Index order, bool bonacich, bool m_lags) {
  PipelineOptions opt;
  opt.scheme = parse_scheme_kind(scheme);
  opt.criterion = parse_criterion(criterion);
  opt.parameter = parameter;
  opt.order = order;
  opt.include_bonacich = bonacich;
  opt.include_m_lags = m_lags;
  return opt;
}

PanelData panel(const VectorXd& y, const MatrixXd& x1, const MatrixXd& x2) {
  PanelData p;
  p.y = y;
  p.x1 = x1;
  p.x2 = x2;
  for (Index j = 0; j < x1.cols(); ++j) p.x1_names.push_back("x1_" + std::to_string(j + 1));
  for (Index j = 0; j < x2.cols(); ++j) p.x2_names.push_back("x2_" + std::to_string(j + 1));
  return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Regularized 2SLS for social interaction models";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  m.def(
      "distinct_eigenvalues",
      [](const MatrixXd& W, double tol) {
        const DistinctEigenvalues d = distinct_eigenvalues(W, tol);
        py::list out;
        for (const EigenCluster& c : d.clusters) out.append(py::make_tuple(c.value, c.multiplicity));
        return out;
      },
      py::arg("W"), py::arg("tol") = 1e-8, "Distinct eigenvalues of a symmetric W as (value, multiplicity), descending.");

  m.def(
      "identification_verdict", [](const MatrixXd& W, double tol) { return std::string(to_string(proposition1_check(W, tol))); },
      py::arg("W"), py::arg("tol") = 1e-8);

  m.def(
      "lee_matrix", [](const std::vector<Index>& sizes) { return lee_block_matrix(sizes).dense(); }, py::arg("sizes"),
      "Block-diagonal complete-graph blocks weighted 1/(m - 1).");

  m.def(
      "q_weights",
      [](const MatrixXd& Q, const std::string& scheme, double parameter) {
        return q_weights(Spectrum::from_instruments(Q), make_scheme(scheme, parameter));
      },
      py::arg("Q"), py::arg("scheme"), py::arg("parameter"));

  m.def(
      "projector",
      [](const MatrixXd& Q, const std::string& scheme, double parameter) {
        auto s = std::make_shared<const Spectrum>(Spectrum::from_instruments(Q));
        return RegularizedProjector(s, make_scheme(scheme, parameter)).dense();
      },
      py::arg("Q"), py::arg("scheme"), py::arg("parameter"), "Dense regularized projector P^alpha for instruments Q.");

  m.def(
      "estimate",
      [](const std::vector<MatrixXd>& blocks, const VectorXd& y, const MatrixXd& x1, const MatrixXd& x2,
         const std::string& scheme, const std::string& criterion, std::optional<double> parameter, Index order,
         bool bonacich, bool m_lags) {
        const GroupedNetwork net = GroupedNetwork::with_row_normalized_m(BlockDiagonal(blocks));
        return result_dict(run_pipeline(net, panel(y, x1, x2), options(scheme, criterion, parameter, order, bonacich, m_lags)));
      },
      py::arg("W_blocks"), py::arg("y"), py::arg("x1"), py::arg("x2"), py::arg("scheme") = "T",
      py::arg("criterion") = "cp", py::arg("parameter") = py::none(), py::arg("order") = 0,
      py::arg("bonacich") = false, py::arg("m_lags") = false,
      "Regularized 2SLS on per-group W blocks; M is the row normalization of W.");

  m.def(
      "estimate_csv",
      [](const std::string& edges, const std::string& nodes, const std::string& scheme, const std::string& criterion,
         std::optional<double> parameter, Index order, bool bonacich, bool m_lags) {
        const NodeTable t = read_nodes_csv(nodes);
        if (!t.has_y) throw InputError("node table has no y column");
        const GroupedNetwork net = assemble_network(read_edges_csv(edges), t.ids);
        return result_dict(run_pipeline(net, t.data, options(scheme, criterion, parameter, order, bonacich, m_lags)));
      },
      py::arg("edges"), py::arg("nodes"), py::arg("scheme") = "T", py::arg("criterion") = "cp",
      py::arg("parameter") = py::none(), py::arg("order") = 0, py::arg("bonacich") = false, py::arg("m_lags") = false);

  m.def(
      "simulate",
      [](Index groups, Index size, Index max_links, Index reps, std::uint64_t seed, int threads) {
        McConfig c;
        c.group_count = groups;
        c.group_size = size;
        c.max_links = max_links;
        c.replications = reps;
        c.seed = seed;
        c.threads = threads;
        McSummary s;
        {
          py::gil_scoped_release release;
          s = summarize(run_experiment(c));
        }
        py::dict rows;
        for (std::size_t e = 0; e < kEstimatorCount; ++e) {
          py::list cells;
          for (const CellSummary& cell : s.cells[e]) cells.append(py::make_tuple(cell.mean, cell.sd, cell.rmse));
          rows[to_string(kEstimators[e])] = cells;
        }
        std::ostringstream os;
        write_summary_text(os, s);
        py::dict d;
        d["estimates"] = rows;
        d["rho"] = py::make_tuple(s.rho.mean, s.rho.sd, s.rho.rmse);
        d["failures"] = s.failures;
        d["table"] = os.str();
        return d;
      },
      py::arg("groups") = 30, py::arg("size") = 10, py::arg("max_links") = 3, py::arg("reps") = 500,
      py::arg("seed") = 42, py::arg("threads") = 0,
      "Monte Carlo: per estimator, (mean, sd, rmse) of lambda, beta1, beta2.");
}
