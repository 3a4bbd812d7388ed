#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "descriptor_minimax/continuous_dae.hpp"
#include "descriptor_minimax/discrete_dae.hpp"
#include "descriptor_minimax/static_minimax.hpp"

namespace dminimax {

enum class ProblemKind { static_model, discrete_dae, continuous_dae };
enum class EstimationMode { apriori, aposteriori, filter, riccati, tikhonov };

const char* to_string(ProblemKind kind);
const char* to_string(EstimationMode mode);

struct EstimationSpec {
  EstimationMode mode{EstimationMode::aposteriori};
  std::vector<Vector<double>> ell;  // static: one block; discrete: N+1 blocks
  TimeFunction ell_function;        // continuous
  std::optional<Vector<double>> ell0;
  std::vector<double> alpha;
};

/// Problem description read from a JSON document with top-level keys
/// `kind`, `model`, `bounds`, `estimation`, `grid` and `seed`.
struct ProblemConfig {
  ProblemKind kind{ProblemKind::static_model};
  StaticModel<double> static_model;
  StaticEllipsoid<double> static_bounds;
  DiscreteDAE<double> dae;
  DAEEllipsoid<double> dae_bounds;
  ContinuousDAE continuous;
  ContinuousEllipsoid continuous_bounds;
  EstimationSpec estimation;
  std::optional<Index> grid_steps;
  std::uint64_t seed{0};

  TimeGrid grid() const;
  Index state_dim() const;
  Index observation_dim() const;
  /// Number of observation samples the problem expects.
  std::size_t observation_count() const;
};

ProblemConfig parse_config(const std::string& path);
ProblemConfig parse_config_text(const std::string& text);
ProblemConfig config_from_json(const nlohmann::json& document);
nlohmann::json config_to_json(const ProblemConfig& config);
bool operator==(const ProblemConfig& a, const ProblemConfig& b);

struct ResultReport {
  std::string command;
  std::string kind;
  std::string mode;
  bool feasible{false};
  std::optional<double> estimate;
  double sigma_hat{std::numeric_limits<double>::infinity()};
  nlohmann::json diagnostics = nlohmann::json::object();
  std::map<std::string, double> timings;
};

nlohmann::json report_to_json(const ResultReport& report);
ResultReport report_from_json(const nlohmann::json& document);
bool operator==(const ResultReport& a, const ResultReport& b);

/// Trajectory CSV with header `k,<prefix>0,...` and one row per time index.
std::string format_trajectory_csv(const std::vector<Vector<double>>& rows, const std::string& prefix);
std::vector<Vector<double>> parse_trajectory_csv(const std::string& text, const std::string& prefix);
void write_trajectory_csv(const std::string& path, const std::vector<Vector<double>>& rows, const std::string& prefix);
std::vector<Vector<double>> read_trajectory_csv(const std::string& path, const std::string& prefix);

enum class Disturbance { boundary, uniform, zero };

struct SimulationResult {
  std::vector<Vector<double>> x;
  std::vector<Vector<double>> y;
  double form{0.0};  // realized value of the bounding quadratic form
};

/// Forward simulation with disturbances drawn on (boundary), inside
/// (uniform) or at the center (zero) of the bounding ellipsoid.
SimulationResult simulate(const ProblemConfig& config, Disturbance disturbance, std::uint64_t seed);

struct CommandOptions {
  std::optional<EstimationMode> mode;
  std::optional<std::uint64_t> seed;
  std::size_t samples{100000};
  std::optional<ResultReport> prior_report;  // validate: check this report instead of recomputing
};

/// Runs `estimate`, `filter`, `riccati`, `tikhonov` or `validate`.
ResultReport run_command(const std::string& command, const ProblemConfig& config,
                         const std::vector<Vector<double>>* observations, const CommandOptions& options = {});

/// Exit status: 0 on success, 2 when the functional is not representable
/// (sigma_hat infinite), 1 on any error.
int exit_code_for(const ResultReport& report);

/// Full command-line entry point.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dminimax
