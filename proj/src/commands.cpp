#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "descriptor_minimax/cli_io.hpp"
#include "descriptor_minimax/dae_filter.hpp"
#include "descriptor_minimax/oracle.hpp"

namespace dminimax {

using nlohmann::json;

namespace {

using Vec = Vector<double>;
using Clock = std::chrono::steady_clock;

// Relative size of the last Tikhonov Cauchy residual below which the
// sequence is reported as converged; a residual that still halves over the
// second half of the alpha sequence also counts.
constexpr double kTikhonovConvergence = 1e-3;

json to_json(const Vec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const std::vector<Vec>& seq) {
  json out = json::array();
  for (const auto& v : seq) out.push_back(to_json(v));
  return out;
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool allowed(ProblemKind kind, EstimationMode mode) {
  switch (kind) {
    case ProblemKind::static_model:
      return mode == EstimationMode::apriori || mode == EstimationMode::aposteriori;
    case ProblemKind::discrete_dae:
      return mode == EstimationMode::apriori || mode == EstimationMode::aposteriori || mode == EstimationMode::filter;
    case ProblemKind::continuous_dae:
      return mode == EstimationMode::apriori || mode == EstimationMode::riccati || mode == EstimationMode::tikhonov;
  }
  return false;
}

const std::vector<Vec>& require_observations(const std::vector<Vec>* y, EstimationMode mode) {
  if (!y) {
    throw Error(ErrorKind::InvalidInput, std::string("mode ") + to_string(mode) + " requires observations (--observations)");
  }
  return *y;
}

void check_observations(const ProblemConfig& config, const std::vector<Vec>& y) {
  if (y.size() != config.observation_count()) {
    throw Error(ErrorKind::DimensionError, "observations have " + std::to_string(y.size()) + " rows, expected " +
                                               std::to_string(config.observation_count()));
  }
  for (std::size_t k = 0; k < y.size(); ++k) {
    if (y[k].size() != config.observation_dim()) {
      throw Error(ErrorKind::DimensionError, "observation row " + std::to_string(k) + " has " +
                                                 std::to_string(y[k].size()) + " values, expected " +
                                                 std::to_string(config.observation_dim()));
    }
  }
}

void fill_static(ResultReport& report, const StaticEstimateReport<double>& r) {
  report.feasible = r.feasible;
  report.sigma_hat = r.sigma_hat;
  report.estimate = r.estimate_value;
  report.diagnostics["representable"] = r.feasible;
  if (r.x_hat.size() > 0) report.diagnostics["x_hat"] = to_json(r.x_hat);
}

void estimate_static(ResultReport& report, const ProblemConfig& config, EstimationMode mode,
                     const std::vector<Vec>* y) {
  StaticEllipsoid<double> bounds = config.static_bounds;
  const Vec& ell = config.estimation.ell.front();
  if (mode == EstimationMode::apriori) {
    bounds.kind = BoundsKind::apriori;
    std::optional<Vec> data;
    if (y) data = y->front();
    fill_static(report, apriori_estimate<double>(config.static_model, bounds, ell, data));
  } else {
    bounds.kind = BoundsKind::aposteriori;
    const auto& data = require_observations(y, mode);
    fill_static(report, aposteriori_estimate<double>(config.static_model, bounds, ell, data.front()));
  }
}

void estimate_discrete(ResultReport& report, const ProblemConfig& config, EstimationMode mode,
                       const std::vector<Vec>* y) {
  const auto& dae = config.dae;
  const auto& ell = config.estimation.ell;
  if (mode == EstimationMode::apriori) {
    const auto model = flatten(dae);
    const auto bounds = flatten_bounds(config.dae_bounds, BoundsKind::apriori);
    std::optional<Vec> data;
    if (y) data = stack<double>(*y);
    const auto r = apriori_estimate<double>(model, bounds, stack<double>(ell), data);
    fill_static(report, r);
    if (r.feasible) report.diagnostics["p"] = to_json(split(r.p, dae.state_dim(), static_cast<Index>(dae.steps())));
    return;
  }
  const auto& data = require_observations(y, mode);
  const auto r = variational_estimate(dae, config.dae_bounds, ell, data);
  report.feasible = r.feasible;
  report.sigma_hat = r.sigma_hat;
  report.diagnostics["representable"] = r.feasible;
  if (r.feasible) {
    report.estimate = r.estimate_value;
    report.diagnostics["x_hat"] = to_json(r.x_hat);
  }
}

void run_filter(ResultReport& report, const ProblemConfig& config, const std::vector<Vec>* y) {
  const auto& data = require_observations(y, EstimationMode::filter);
  const auto& ell = config.estimation.ell;
  for (std::size_t k = 0; k + 1 < ell.size(); ++k) {
    if (ell[k].squaredNorm() != 0) {
      throw Error(ErrorKind::InvalidInput, "filter mode estimates (ell, x_N); estimation.ell must vanish before step N");
    }
  }
  const auto r = filter_run(config.dae, config.dae_bounds, data, ell.back());
  const auto reference = variational_estimate(config.dae, config.dae_bounds, ell, data);
  report.feasible = true;
  report.estimate = r.estimate;
  report.sigma_hat = reference.sigma_hat;
  report.diagnostics["x_hat_final"] = to_json(r.final.x_hat);
  report.diagnostics["variational_estimate"] = reference.estimate_value;
  report.diagnostics["filter_gap"] = std::abs(r.estimate - reference.estimate_value);
}

void estimate_continuous(ResultReport& report, const ProblemConfig& config, const std::vector<Vec>* y) {
  const auto r = apriori_estimate_continuous(config.continuous, config.continuous_bounds,
                                             config.estimation.ell_function, config.grid(), y ? *y : std::vector<Vec>{});
  report.feasible = r.feasible;
  report.sigma_hat = r.sigma_hat;
  report.estimate = r.estimate;
  report.diagnostics["representable"] = r.feasible;
  report.diagnostics["grid_steps"] = config.grid().steps;
  if (r.feasible) report.diagnostics["u_hat"] = to_json(r.u_hat);
}

void run_riccati(ResultReport& report, const ProblemConfig& config, const std::vector<Vec>* y) {
  const auto& data = require_observations(y, EstimationMode::riccati);
  const auto r = riccati_filter(config.continuous, config.continuous_bounds, *config.estimation.ell0, data, config.grid());
  report.feasible = r.feasible;
  report.sigma_hat = r.sigma_hat;
  report.diagnostics["representable"] = r.feasible;
  if (r.feasible) {
    report.estimate = r.estimate;
    double k_max = 0;
    for (const auto& k : r.K) k_max = std::max(k_max, k.norm());
    report.diagnostics["K_max_norm"] = k_max;
    report.diagnostics["x_hat_final"] = to_json(r.x_hat.back());
  }
}

void run_tikhonov(ResultReport& report, const ProblemConfig& config, const std::vector<Vec>* y) {
  const auto grid = config.grid();
  std::vector<double> alpha = config.estimation.alpha;
  if (alpha.empty()) {
    for (int k = 1; k <= 10; ++k) alpha.push_back(std::ldexp(1.0, -k));
  }
  const auto r = tikhonov_approximate(config.continuous, config.continuous_bounds, config.estimation.ell_function, grid,
                                      alpha);
  const double scale = grid_norm(r.u_hat.back(), grid.step());
  const double last = r.residuals.empty() ? 0.0 : r.residuals.back();
  const bool below_floor = last <= kTikhonovConvergence * scale;
  const std::size_t mid = r.residuals.size() / 2;
  const bool decaying = r.residuals.size() >= 3 && last < 0.5 * r.residuals[mid];
  const bool converged = below_floor || decaying;
  report.feasible = converged;
  report.sigma_hat = converged ? std::max(0.0, r.sigma.back()) : std::numeric_limits<double>::infinity();
  if (converged && y) {
    double value = 0;
    for (std::size_t k = 0; k < y->size(); ++k) value += grid.step() * r.u_hat.back()[k].dot((*y)[k]);
    report.estimate = value;
  }
  report.diagnostics["alpha"] = r.alpha;
  report.diagnostics["sigma"] = r.sigma;
  report.diagnostics["residuals"] = r.residuals;
  report.diagnostics["u_hat_norm"] = scale;
  report.diagnostics["relative_residual"] = scale > 0 ? last / scale : last;
  report.diagnostics["below_floor"] = below_floor;
  report.diagnostics["decaying"] = decaying;
  report.diagnostics["converged"] = converged;
}

void run_validate(ResultReport& report, const ProblemConfig& config, const std::vector<Vec>* y,
                  const CommandOptions& options) {
  const auto& data = require_observations(y, EstimationMode::aposteriori);
  ResultReport checked;
  if (options.prior_report) {
    checked = *options.prior_report;
    if (checked.kind != to_string(config.kind)) {
      throw Error(ErrorKind::InvalidInput, "report kind " + checked.kind + " does not match the config");
    }
    if (checked.mode != "aposteriori" && checked.mode != "filter") {
      throw Error(ErrorKind::InvalidInput, "validate checks a posteriori or filter reports, got mode " + checked.mode);
    }
  } else {
    CommandOptions estimate_options;
    estimate_options.mode = EstimationMode::aposteriori;
    checked = run_command("estimate", config, y, estimate_options);
  }
  report.mode = checked.mode;
  report.feasible = checked.feasible;
  report.estimate = checked.estimate;
  report.sigma_hat = checked.sigma_hat;
  if (!checked.feasible || !checked.estimate) {
    report.diagnostics["oracle"] = {{"skipped", "no finite estimate to check"}};
    return;
  }

  StaticModel<double> model;
  StaticEllipsoid<double> bounds;
  Vec ell;
  Vec stacked_y;
  if (config.kind == ProblemKind::static_model) {
    model = config.static_model;
    bounds = config.static_bounds;
    bounds.kind = BoundsKind::aposteriori;
    ell = config.estimation.ell.front();
    stacked_y = data.front();
  } else {
    model = flatten(config.dae);
    bounds = flatten_bounds(config.dae_bounds, BoundsKind::aposteriori);
    ell = stack<double>(config.estimation.ell);
    stacked_y = stack<double>(data);
  }
  const std::uint64_t seed = options.seed.value_or(config.seed);
  const auto sampling = sample_reachability(model, bounds, stacked_y, options.samples, seed);
  if (sampling.empty) {
    throw Error(ErrorKind::InconsistentData, "observations are inconsistent with the bounding set");
  }
  const auto check = chebyshev_check(sampling.samples, ell, *checked.estimate, checked.sigma_hat);
  report.diagnostics["oracle"] = {
      {"samples", options.samples},
      {"seed", seed},
      {"threads", oracle_threads()},
      {"reduced_dim", sampling.reduced_dim},
      {"unbounded_dims", sampling.unbounded_dims},
      {"max_dev", check.max_dev},
      {"sup_ratio", checked.sigma_hat > 0 ? check.max_dev / checked.sigma_hat : 0.0},
      {"violations", check.violations},
  };
}

}  // namespace

ResultReport run_command(const std::string& command, const ProblemConfig& config, const std::vector<Vec>* observations,
                         const CommandOptions& options) {
  EstimationMode mode = options.mode.value_or(config.estimation.mode);
  if (command == "filter") mode = EstimationMode::filter;
  if (command == "riccati") mode = EstimationMode::riccati;
  if (command == "tikhonov") mode = EstimationMode::tikhonov;
  if (command == "validate") mode = EstimationMode::aposteriori;
  if (command != "estimate" && command != "filter" && command != "riccati" && command != "tikhonov" &&
      command != "validate") {
    throw Error(ErrorKind::InvalidInput, "unknown command " + command);
  }
  if (command == "estimate" && mode != EstimationMode::apriori && mode != EstimationMode::aposteriori) {
    throw Error(ErrorKind::InvalidInput, std::string("estimate runs modes apriori|aposteriori; use the ") +
                                             to_string(mode) + " command");
  }
  if (command != "validate" && !allowed(config.kind, mode)) {
    throw Error(ErrorKind::InvalidInput, std::string("mode ") + to_string(mode) + " is not available for kind " +
                                             to_string(config.kind));
  }
  if (mode == EstimationMode::riccati && !config.estimation.ell0) {
    throw Error(ErrorKind::SchemaError, "estimation.ell0: required for riccati mode");
  }
  if ((mode == EstimationMode::tikhonov ||
       (config.kind == ProblemKind::continuous_dae && mode == EstimationMode::apriori)) &&
      config.estimation.ell_function.empty()) {
    throw Error(ErrorKind::SchemaError, "estimation.ell: required for this mode");
  }
  if (command == "validate" && config.kind == ProblemKind::continuous_dae) {
    throw Error(ErrorKind::InvalidInput, "validate supports static and discrete_dae problems");
  }
  if (observations) check_observations(config, *observations);

  ResultReport report;
  report.command = command;
  report.kind = to_string(config.kind);
  report.mode = to_string(mode);
  const auto start = Clock::now();
  if (command == "validate") {
    run_validate(report, config, observations, options);
  } else if (mode == EstimationMode::filter) {
    run_filter(report, config, observations);
  } else if (mode == EstimationMode::riccati) {
    run_riccati(report, config, observations);
  } else if (mode == EstimationMode::tikhonov) {
    run_tikhonov(report, config, observations);
  } else if (config.kind == ProblemKind::static_model) {
    estimate_static(report, config, mode, observations);
  } else if (config.kind == ProblemKind::discrete_dae) {
    estimate_discrete(report, config, mode, observations);
  } else {
    estimate_continuous(report, config, observations);
  }
  report.timings["total_ms"] = elapsed_ms(start);
  return report;
}

int exit_code_for(const ResultReport& report) {
  if (report.command == "validate") {
    const auto& oracle = report.diagnostics.find("oracle");
    if (oracle != report.diagnostics.end() && oracle->contains("violations") &&
        (*oracle)["violations"].get<std::size_t>() > 0) {
      return 1;
    }
  }
  return std::isinf(report.sigma_hat) ? 2 : 0;
}

namespace {

struct CliOptions {
  std::string config;
  std::string observations;
  std::string output;
  std::string states;
  std::string report;
  std::string mode;
  std::string disturbance{"boundary"};
  std::optional<std::uint64_t> seed;
  std::size_t samples{100000};
  std::optional<Index> grid_steps;
};

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::InvalidInput, "cannot write " + path);
  file << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

ProblemConfig load_config(const CliOptions& o) {
  ProblemConfig config = parse_config(o.config);
  if (o.grid_steps) {
    if (config.kind != ProblemKind::continuous_dae) {
      throw Error(ErrorKind::InvalidInput, "--grid-steps applies to continuous_dae problems only");
    }
    if (*o.grid_steps < 1) throw Error(ErrorKind::InvalidGrid, "--grid-steps must be positive");
    config.grid_steps = *o.grid_steps;
  }
  return config;
}

int dispatch(const std::string& command, const CliOptions& o, std::ostream& out) {
  const ProblemConfig config = load_config(o);
  if (command == "check") {
    json summary = {{"valid", true},
                    {"kind", to_string(config.kind)},
                    {"mode", to_string(config.estimation.mode)},
                    {"state_dim", config.state_dim()},
                    {"observation_dim", config.observation_dim()},
                    {"observation_count", config.observation_count()}};
    write_text(o.output, summary.dump(2) + "\n", out);
    return 0;
  }
  if (command == "simulate") {
    Disturbance kind = Disturbance::boundary;
    if (o.disturbance == "uniform") kind = Disturbance::uniform;
    if (o.disturbance == "zero") kind = Disturbance::zero;
    const std::uint64_t seed = o.seed.value_or(config.seed);
    const auto sim = simulate(config, kind, seed);
    write_text(o.output, format_trajectory_csv(sim.y, "y"), out);
    if (!o.states.empty()) write_trajectory_csv(o.states, sim.x, "x");
    if (!o.output.empty()) {
      json summary = {{"disturbance", o.disturbance}, {"seed", seed}, {"form", sim.form}, {"steps", sim.y.size()}};
      out << summary.dump(2) << "\n";
    }
    return 0;
  }

  std::optional<std::vector<Vec>> observations;
  if (!o.observations.empty()) observations = read_trajectory_csv(o.observations, "y");
  CommandOptions options;
  options.seed = o.seed;
  options.samples = o.samples;
  if (!o.mode.empty()) {
    options.mode = o.mode == "apriori" ? EstimationMode::apriori : EstimationMode::aposteriori;
  }
  if (!o.report.empty()) options.prior_report = report_from_json(json::parse(read_text(o.report)));
  const auto report = run_command(command, config, observations ? &*observations : nullptr, options);
  write_text(o.output, report_to_json(report).dump(2) + "\n", out);
  return exit_code_for(report);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimax state estimation for linear descriptor systems", "descriptor_minimax"};
  app.require_subcommand(1);
  CliOptions o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Problem configuration (JSON)")->required();
    sub->add_option("--output", o.output, "Write the result here instead of stdout");
    sub->add_option("--seed", o.seed, "Seed override");
    sub->add_option("--grid-steps", o.grid_steps, "Grid steps override for continuous problems");
  };
  auto with_data = [&](CLI::App* sub) {
    common(sub);
    sub->add_option("--observations", o.observations, "Observation CSV (k,y0,...)");
  };

  auto* estimate = app.add_subcommand("estimate", "Minimax a priori or a posteriori estimate");
  with_data(estimate);
  estimate->add_option("--mode", o.mode, "Estimation mode")->check(CLI::IsMember({"apriori", "aposteriori"}));
  auto* filter = app.add_subcommand("filter", "Recursive filter for discrete DAEs");
  with_data(filter);
  auto* riccati = app.add_subcommand("riccati", "Riccati filter for continuous DAEs");
  with_data(riccati);
  auto* tikhonov = app.add_subcommand("tikhonov", "Tikhonov approximation for continuous DAEs");
  with_data(tikhonov);
  auto* sim = app.add_subcommand("simulate", "Forward simulation with bounded disturbances");
  common(sim);
  sim->add_option("--disturbance", o.disturbance, "boundary | uniform | zero")
      ->check(CLI::IsMember({"boundary", "uniform", "zero"}));
  sim->add_option("--states", o.states, "State trajectory CSV (k,x0,...)");
  auto* validate = app.add_subcommand("validate", "Check an estimate against reachability-set samples");
  with_data(validate);
  validate->add_option("--report", o.report, "Report to check instead of recomputing");
  validate->add_option("--samples", o.samples, "Number of oracle samples")->check(CLI::PositiveNumber);
  auto* check = app.add_subcommand("check", "Validate a configuration");
  common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return dispatch(command, o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return 1;
}

}  // namespace dminimax
