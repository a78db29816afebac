#include "drovar_cli/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <ostream>

#include "drovar/errors.hpp"
#include "drovar/oracle.hpp"
#include "drovar/robust.hpp"
#include "drovar/solver.hpp"
#include "drovar_cli/csv_input.hpp"

namespace drovar::cli {

namespace {

using Json = nlohmann::ordered_json;

struct RunConfig {
  std::string subcommand;
  std::string input;
  std::string divergence;
  std::optional<double> eta;
  std::optional<double> eta_min;
  std::optional<double> eta_max;
  std::optional<int> steps;
  std::string curve_out;
  long grid = 0;
  std::vector<double> box;
  bool simplex = false;
  double tol = 1e-4;
  SolverConfig solver;
};

Json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return round12(v);
}

Json number(const ExtendedReal& v) { return v.is_finite() ? number(v.value()) : Json(nullptr); }

/// Tilt weights re-expanded to the original rows (dropped rows get 0).
Json tilt_json(const std::vector<double>& tilt, std::size_t raw_rows,
               const std::vector<std::size_t>& kept) {
  Json arr = Json::array();
  if (tilt.size() != kept.size()) return arr;
  std::vector<double> full(raw_rows, 0.0);
  for (std::size_t i = 0; i < kept.size(); ++i) full[kept[i]] = tilt[i];
  for (const double w : full) arr.push_back(number(w));
  return arr;
}

Json record(const BoundResult& r, double eta, const FDivergenceFamily& family,
            std::size_t raw_rows, const std::vector<std::size_t>& kept) {
  Json j;
  j["bound"] = number(r.value);
  j["dual_point"] = {{"lambda", number(r.dual_point.lambda)},
                     {"beta", number(r.dual_point.beta)},
                     {"nu", number(r.dual_point.nu)}};
  j["tilt_weights"] = tilt_json(r.tilt.weights, raw_rows, kept);
  Json diag;
  diag["normalization"] = number(r.diagnostics.normalization);
  diag["achieved_divergence"] = number(r.diagnostics.achieved_divergence);
  diag["mean_condition_gap"] = r.diagnostics.mean_condition_gap
                                   ? number(*r.diagnostics.mean_condition_gap)
                                   : Json(nullptr);
  diag["boundary"] = r.diagnostics.boundary_flag;
  j["diagnostics"] = diag;
  j["status"] = to_string(r.status);
  j["iterations"] = r.iterations;
  j["eta"] = number(eta);
  j["divergence"] = family.to_string();
  return j;
}

double single_eta(const RunConfig& cfg) {
  if (cfg.eta_min || cfg.eta_max || cfg.steps) {
    throw CliError(kUsage, cfg.subcommand + " takes --eta, not a sweep range");
  }
  if (!cfg.eta) throw CliError(kUsage, cfg.subcommand + " requires --eta");
  return *cfg.eta;
}

std::vector<double> sweep_etas(const RunConfig& cfg) {
  if (cfg.eta) throw CliError(kUsage, "sweep takes --eta-min/--eta-max/--steps, not --eta");
  if (!cfg.eta_min || !cfg.eta_max || !cfg.steps) {
    throw CliError(kUsage, "sweep requires --eta-min, --eta-max and --steps");
  }
  const double a = *cfg.eta_min;
  const double b = *cfg.eta_max;
  const int n = *cfg.steps;
  if (!(a < b)) throw CliError(kUsage, "sweep requires --eta-min < --eta-max");
  if (n < 2) throw CliError(kUsage, "sweep requires --steps >= 2");
  std::vector<double> etas;
  for (int i = 0; i < n; ++i) {
    etas.push_back(i == n - 1 ? b : a + (b - a) * static_cast<double>(i) / (n - 1));
  }
  return etas;
}

void write_curve(const std::string& path, const std::vector<double>& etas,
                 const std::vector<double>& bounds) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CliError(kUsage, path + ": cannot open curve output");
  f << "eta,bound\n";
  char buf[64];
  for (std::size_t i = 0; i < etas.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", etas[i], bounds[i]);
    f << buf;
  }
}

DecisionConstraint constraint_for(const RunConfig& cfg, std::size_t dims) {
  if (cfg.simplex && !cfg.box.empty()) throw CliError(kUsage, "--box and --simplex are exclusive");
  if (cfg.simplex) return DecisionConstraint::simplex();
  if (cfg.box.empty()) throw CliError(kUsage, "robust requires --box LO HI or --simplex");
  return DecisionConstraint::box(std::vector<double>(dims, cfg.box[0]),
                                 std::vector<double>(dims, cfg.box[1]));
}

int execute(const RunConfig& cfg, std::ostream& out) {
  const FDivergenceFamily family = FDivergenceFamily::parse(cfg.divergence);
  const CsvTable table = read_csv(cfg.input);
  const std::string& sub = cfg.subcommand;
  int code = kOk;
  Json doc;

  if (sub == "bound-mean") {
    const double eta = single_eta(cfg);
    const BoundInput in = bound_input(table, false);
    const BoundResult r = mean_bound(in.data.rho(), in.measure, family, eta, cfg.solver);
    doc = record(r, eta, family, in.raw_rows, in.kept);
  } else if (sub == "bound-variance") {
    const double eta = single_eta(cfg);
    const BoundInput in = bound_input(table);
    const BoundResult r = variance_bound(in.data, in.measure, family, eta, cfg.solver);
    doc = record(r, eta, family, in.raw_rows, in.kept);
  } else if (sub == "sweep") {
    const std::vector<double> etas = sweep_etas(cfg);
    const BoundInput in = bound_input(table);
    for (const double eta : etas) validate_eta(family, eta);
    std::vector<BoundResult> results;
    results.reserve(etas.size());
    for (const double eta : etas) {
      results.push_back(variance_bound(in.data, in.measure, family, eta, cfg.solver));
    }
    doc = Json::array();
    std::vector<double> bounds;
    for (std::size_t i = 0; i < etas.size(); ++i) {
      doc.push_back(record(results[i], etas[i], family, in.raw_rows, in.kept));
      bounds.push_back(results[i].value);
    }
    if (!cfg.curve_out.empty()) write_curve(cfg.curve_out, etas, bounds);
  } else if (sub == "oracle-check") {
    const double eta = single_eta(cfg);
    const BoundInput in = bound_input(table);
    OracleConfig oc;
    oc.grid_per_dim = cfg.grid;
    oc.validate();
    const BoundResult r = variance_bound(in.data, in.measure, family, eta, cfg.solver);
    const OracleResult o = primal_sup_grid(in.data, in.measure, family, eta, oc);
    const double gap = std::abs(r.value - o.value);
    doc = record(r, eta, family, in.raw_rows, in.kept);
    doc["oracle_value"] = number(o.value);
    doc["gap"] = number(gap);
    if (!(gap <= cfg.tol)) code = kGapExceeded;
  } else if (sub == "robust") {
    const double eta = single_eta(cfg);
    const ScenarioInput in = scenario_input(table);
    const DecisionConstraint constraint = constraint_for(cfg, in.scenarios.columns());
    const RobustSolution s = robust_minimize(in.scenarios, constraint, family, eta, cfg.solver);
    const BoundResult r = robust_bound(s.x, in.scenarios, family, eta, cfg.solver);
    doc = record(r, eta, family, in.raw_rows, in.kept);
    Json x = Json::array();
    for (const double v : s.x) x.push_back(number(v));
    doc["x"] = x;
  } else {
    throw CliError(kUsage, "unknown subcommand '" + sub + "'");
  }

  out << doc.dump(2) << '\n';
  return code;
}

void add_common(CLI::App* app, RunConfig& cfg) {
  app->add_option("--input", cfg.input, "CSV input file")->required();
  app->add_option("--divergence", cfg.divergence, "kl or alpha:<value>")->required();
  app->add_option("--eta", cfg.eta, "divergence radius");
  app->add_option("--grad-tol", cfg.solver.grad_tol, "solver stationarity tolerance");
  app->add_option("--max-iters", cfg.solver.max_iters, "solver iteration cap per start");
  app->add_option("--multistart", cfg.solver.multistart_count, "solver start count");
}

}  // namespace

double round12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  const double r = std::strtod(buf, nullptr);
  return r == 0.0 ? 0.0 : r;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Worst-case variance-penalized bounds over f-divergence balls", "drovar"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* mean = app.add_subcommand("bound-mean", "sup of E_Q[rho] over the ball");
  auto* var = app.add_subcommand("bound-variance", "sup of E_Q[rho] + Var_Q[phi] over the ball");
  auto* sweep = app.add_subcommand("sweep", "bound-variance over a linear eta grid");
  auto* oracle = app.add_subcommand("oracle-check", "bound-variance against the grid oracle");
  auto* robust = app.add_subcommand("robust", "min over x of the worst-case bound");
  for (auto* sub : {mean, var, sweep, oracle, robust}) add_common(sub, cfg);

  sweep->add_option("--eta-min", cfg.eta_min, "sweep start");
  sweep->add_option("--eta-max", cfg.eta_max, "sweep end");
  sweep->add_option("--steps", cfg.steps, "sweep point count");
  sweep->add_option("--curve-out", cfg.curve_out, "write eta,bound CSV here");
  oracle->add_option("--grid", cfg.grid, "oracle points per coordinate");
  oracle->add_option("--tol", cfg.tol, "largest accepted |bound - oracle|");
  robust->add_option("--box", cfg.box, "per-coordinate bounds LO HI")->expected(2);
  robust->add_flag("--simplex", cfg.simplex, "x on the probability simplex");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "drovar: " << e.what() << '\n';
    return kUsage;
  }
  cfg.subcommand = app.get_subcommands().front()->get_name();

  try {
    cfg.solver.validate();
    return execute(cfg, out);
  } catch (const CliError& e) {
    err << "drovar: " << e.what() << '\n';
    return e.code();
  } catch (const InfeasibleStartError& e) {
    err << "drovar: " << e.what() << '\n';
    return kInfeasibleStart;
  } catch (const UnsupportedSizeError& e) {
    err << "drovar: " << e.what() << '\n';
    return kUnsupportedSize;
  } catch (const ValidationError& e) {
    err << "drovar: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace drovar::cli
