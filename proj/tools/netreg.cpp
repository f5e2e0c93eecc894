// netreg: identification diagnostics, regularized 2SLS and Monte Carlo
// tables for network models with group fixed effects.
//
// Exit status: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "netreg/errors.hpp"
#include "netreg/identification.hpp"
#include "netreg/io.hpp"
#include "netreg/montecarlo.hpp"
#include "netreg/pipeline.hpp"
#include "netreg/transforms.hpp"

using namespace netreg;

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Writes to --out when given, else to stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw InputError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> g;
  if (s.empty()) return g;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      g.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw InputError("bad grid value '" + tok + "'");
    }
  }
  return g;
}

struct DataOpts {
  std::string data;
  std::string edges;
  std::string m_mode = "rownorm";
};

void add_data_opts(CLI::App* sub, DataOpts& d, bool data_required) {
  auto* o = sub->add_option("--data", d.data, "node CSV: group_id,node_id,x1*,x2*,y");
  if (data_required) o->required();
  sub->add_option("--edges", d.edges, "edge CSV: group_id,src,dst[,weight]")->required();
  sub->add_option("--m-mode", d.m_mode, "M matrix: rownorm (row-normalized W) or same (M = W)")
      ->check(CLI::IsMember({"rownorm", "same"}));
}

struct Loaded {
  GroupedNetwork net;
  NodeTable nodes;
};

Loaded load(const DataOpts& d) {
  Loaded l;
  const auto edges = read_edges_csv(d.edges);
  if (!d.data.empty()) l.nodes = read_nodes_csv(d.data);
  l.net = assemble_network(edges, l.nodes.ids,
                           d.m_mode == "same" ? MMode::SameAsW : MMode::RowNormalized);
  return l;
}

struct EstOpts {
  std::string scheme = "T";
  std::string criterion = "cp";
  double parameter = std::numeric_limits<double>::quiet_NaN();
  std::string grid;
  Index order = 0;
  bool bonacich = false;
  bool m_lags = false;
  std::string normalize = "unit";
  bool literal_loo = false;
  std::string out;
};

void add_est_opts(CLI::App* sub, EstOpts& e) {
  sub->add_option("--scheme", e.scheme, "regularization scheme: T, LF or PC")
      ->check(CLI::IsMember({"T", "LF", "PC"}));
  sub->add_option("--criterion", e.criterion, "goodness-of-fit criterion: cp, gcv or loo")
      ->check(CLI::IsMember({"cp", "gcv", "loo"}));
  auto* alpha = sub->add_option("--alpha", e.parameter,
                                "fixed parameter (alpha for T, iterations for LF, components for PC)");
  sub->add_option("--grid", e.grid, "comma-separated parameter grid (increasing)")->excludes(alpha);
  sub->add_option("--order", e.order, "highest power of W in the instrument set (0 = auto)")
      ->check(CLI::NonNegativeNumber);
  sub->add_flag("--bonacich", e.bonacich, "add per-group W^j iota instruments");
  sub->add_flag("--m-lags", e.m_lags, "add M-premultiplied instrument copies");
  sub->add_option("--normalize", e.normalize, "instrument normalization: none, unit, standardized")
      ->check(CLI::IsMember({"none", "unit", "standardized"}));
  sub->add_flag("--loo-literal", e.literal_loo, "LOO by delete-one refits instead of the identity");
  sub->add_option("--out", e.out, "output file (default stdout)");
}

PipelineOptions pipeline_options(const EstOpts& e) {
  PipelineOptions p;
  p.scheme = parse_scheme_kind(e.scheme);
  p.criterion = parse_criterion(e.criterion);
  if (std::isfinite(e.parameter)) p.parameter = e.parameter;
  p.grid = parse_grid(e.grid);
  if (p.scheme != SchemeKind::Tikhonov) {
    auto integral = [](double v) { return v >= 1.0 && v == std::floor(v); };
    for (double v : p.grid) {
      if (!integral(v)) throw InputError("LF and PC grids take positive integers, got " + num(v));
    }
    if (p.parameter && !integral(*p.parameter)) {
      throw InputError("LF and PC take a positive integer parameter, got " + num(*p.parameter));
    }
  }
  p.order = e.order;
  p.include_bonacich = e.bonacich;
  p.include_m_lags = e.m_lags;
  p.normalization = e.normalize == "none"           ? Normalization::None
                    : e.normalize == "standardized" ? Normalization::Standardized
                                                    : Normalization::UnitVariance;
  p.literal_loo = e.literal_loo;
  return p;
}

void print_result(std::ostream& os, const PipelineOutput& po) {
  const EstimationResult& r = po.result;
  os << "estimator: " << r.estimator << "\n";
  os << "scheme: " << (r.scheme ? r.scheme->describe() : std::string("-")) << "\n";
  os << "alpha_star: " << num(r.alpha_star) << "\n";
  os << "n: " << po.instruments.rows() << "\n";
  os << "instruments: " << po.instruments.cols() << " (order " << po.order << ")\n";
  os << "coefficient            estimate      std_error\n";
  for (Index j = 0; j < r.delta.size(); ++j) {
    char line[128];
    std::snprintf(line, sizeof line, "%-22s %-13s %s\n", r.names[static_cast<std::size_t>(j)].c_str(),
                  num(r.delta(j)).c_str(), num(r.std_errors(j)).c_str());
    os << line;
  }
  os << "rho_tilde: " << num(r.rho_tilde) << "\n";
  os << "sigma2_hat: " << num(r.sigma2_hat) << "\n";
  os << "tr_P: " << num(r.tr_P) << "\n";
  os << "tr_P2: " << num(r.tr_P2) << "\n";
  os << "condition_number: " << num(r.instrument_condition_number) << "\n";
  os << "normal_equations_condition_number: " << num(r.normal_condition_number) << "\n";
  os << "distinct_eigenvalues: "
     << (r.distinct_eigenvalues ? std::to_string(*r.distinct_eigenvalues) : std::string("-")) << "\n";
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
  os << "caveat: " << r.caveat << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"netreg: regularized 2SLS for network models with group effects"};
  app.set_config("--config", "", "key = value configuration file");
  app.require_subcommand(1);

  // simulate
  McConfig mc;
  std::string sim_contextual = "independent", sim_criterion = "cp", sim_format = "text",
              sim_out, sim_emit;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo tables (Mean (SD) [RMSE])");
  sim->add_option("--groups", mc.group_count, "number of groups g")->check(CLI::PositiveNumber);
  sim->add_option("--size", mc.group_size, "group size m")->check(CLI::PositiveNumber);
  sim->add_option("--max-links", mc.max_links, "maximum out-links per node")->check(CLI::NonNegativeNumber);
  sim->add_option("--reps", mc.replications, "replications")->check(CLI::PositiveNumber);
  sim->add_option("--seed", mc.seed, "master seed");
  sim->add_option("--sigma2", mc.sigma2, "variance of epsilon");
  sim->add_option("--threads", mc.threads, "worker threads (0: NETREG_THREADS or hardware)");
  sim->add_option("--contextual", sim_contextual, "contextual regressor: independent or same")
      ->check(CLI::IsMember({"independent", "same"}));
  sim->add_option("--criterion", sim_criterion, "selection criterion: cp, gcv or loo")
      ->check(CLI::IsMember({"cp", "gcv", "loo"}));
  sim->add_option("--format", sim_format, "text or csv")->check(CLI::IsMember({"text", "csv"}));
  sim->add_option("--out", sim_out, "output file (default stdout)");
  sim->add_option("--emit-data", sim_emit,
                  "write nodes.csv and edges.csv for replication 0 into this directory and exit");

  // estimate
  DataOpts est_data;
  EstOpts est;
  auto* estc = app.add_subcommand("estimate", "regularized 2SLS on CSV data");
  add_data_opts(estc, est_data, true);
  add_est_opts(estc, est);

  // diagnose
  DataOpts diag_data;
  double diag_tol = 1e-8;
  bool diag_kv = false, diag_with_rho = false;
  std::string diag_out;
  auto* diag = app.add_subcommand("diagnose", "spectral identification report");
  add_data_opts(diag, diag_data, false);
  diag->add_option("--tol", diag_tol, "relative eigenvalue clustering tolerance")->check(CLI::PositiveNumber);
  diag->add_flag("--kv", diag_kv, "key=value output");
  diag->add_flag("--with-rho", diag_with_rho, "use the stack with Bonacich columns and M copies");
  diag->add_option("--out", diag_out, "output file (default stdout)");

  // select
  DataOpts sel_data;
  EstOpts sel;
  auto* selc = app.add_subcommand("select", "export the S_hat(alpha) curve as CSV");
  add_data_opts(selc, sel_data, true);
  add_est_opts(selc, sel);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*sim) {
      mc.contextual = sim_contextual == "same" ? Contextual::Same : Contextual::Independent;
      mc.criterion = parse_criterion(sim_criterion);
      mc.validate();
      if (!sim_emit.empty()) {
        const McDraw d = draw_replication(mc, 0);
        std::filesystem::create_directories(sim_emit);
        std::ofstream fe(std::filesystem::path(sim_emit) / "edges.csv");
        std::ofstream fn(std::filesystem::path(sim_emit) / "nodes.csv");
        if (!fe || !fn) throw InputError("cannot write into " + sim_emit);
        write_edges_csv(fe, d.net);
        write_nodes_csv(fn, d.net, d.data);
        std::cerr << "wrote " << sim_emit << "/edges.csv and " << sim_emit << "/nodes.csv\n";
        return 0;
      }
      const McResults res = run_experiment(mc);
      const McSummary s = summarize(res);
      Output out(sim_out);
      if (sim_format == "csv") write_summary_csv(out.stream(), s);
      else write_summary_text(out.stream(), s);
    } else if (*estc) {
      const Loaded l = load(est_data);
      if (!l.nodes.has_y) throw InputError("node file has no y column");
      const PipelineOutput po = run_pipeline(l.net, l.nodes.data, pipeline_options(est));
      Output out(est.out);
      print_result(out.stream(), po);
    } else if (*diag) {
      const Loaded l = load(diag_data);
      MatrixXd X(l.net.size(), 0);
      if (!diag_data.data.empty()) X = regressors(l.net, l.nodes.data.x1, l.nodes.data.x2);
      const IdentificationReport rep = diagnose(l.net, X, !diag_with_rho, diag_tol);
      Output out(diag_out);
      if (diag_kv) rep.print_kv(out.stream());
      else rep.print_text(out.stream());
    } else if (*selc) {
      const Loaded l = load(sel_data);
      if (!l.nodes.has_y) throw InputError("node file has no y column");
      PipelineOptions p = pipeline_options(sel);
      if (p.parameter) throw InputError("--alpha fixes the parameter; select needs a grid");
      const PipelineOutput po = run_pipeline(l.net, l.nodes.data, p);
      Output out(sel.out);
      write_curve_csv(out.stream(), *po.selection);
      std::cerr << "selected " << to_string(p.scheme) << " parameter " << num(po.selection->alpha_star)
                << "\n";
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what();
    if (std::isfinite(e.condition_number())) std::cerr << " (condition number " << num(e.condition_number()) << ")";
    std::cerr << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
