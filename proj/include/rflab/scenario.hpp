#pragma once

#include <string>
#include <vector>

#include "rflab/analysis.hpp"

namespace rflab {

/// Declarative description of one pipeline run: domain, discretization,
/// operator kind, data, solver knobs, analysis windows, and output paths.
/// Serialized as JSON; `parse_config(emit_config(cfg))` reproduces cfg
/// field for field (doubles round-trip exactly).
struct ScenarioConfig {
  std::string name = "scenario";
  std::string command = "solve";

  // Domain and discretization.
  std::string domain_kind = "interval";  ///< "interval" | "ball"
  double interval_a = -1.0;
  double interval_b = 1.0;
  double ball_radius = 1.0;
  int ball_dim = 1;
  double alpha = 0.75;
  int mesh_m = 256;
  double mesh_gamma = 3.0;
  std::string operator_kind = "regional";  ///< "regional" | "full"

  // Nonlinearity f(s) = c s^p ("zero" ignores c, p).
  std::string f_family = "zero";  ///< "zero" | "power"
  double f_c = 1.0;
  double f_p = 2.0;

  // Constant interior source and boundary trace.
  double source_constant = 0.0;
  double trace_constant = 1.0;

  // Solver knobs (mirrors SolverConfig).
  std::string policy = "adaptive";  ///< "adaptive" | "derivative-bound"
  double tol_fixed_point = 1e-9;
  int max_iter = 200000;
  double n0 = 1.0;
  double level_factor = 2.0;
  double n_cap = 16384.0;
  double tol_limit = 1e-6;
  double interior_window = 0.0;
  int divergence_streak = 4;

  // Analysis fit window (0 = defaults).
  double window_rho_lo = 0.0;
  double window_rho_hi = 0.0;

  // Barrier and certificate knobs.
  double tau = -0.5;
  double barrier_t0 = 0.25;
  double lambda0 = 1.0;

  // Power list for the tail classifier command.
  std::vector<double> ko_powers = {0.5, 1.0, 2.0, 5.0, 8.0};

  // Outputs.
  std::string out_dir = ".";
  bool write_csv = true;
  bool write_json = true;
};

/// Translate config fields into module inputs (each throws ValidationError
/// on an unknown tag).
Domain scenario_domain(const ScenarioConfig& cfg);
Nonlinearity scenario_nonlinearity(const ScenarioConfig& cfg);
SolverConfig scenario_solver(const ScenarioConfig& cfg);
OperatorKind scenario_operator_kind(const ScenarioConfig& cfg);

/// Parse a JSON document into a config (missing fields keep defaults;
/// malformed documents or unknown tags throw ValidationError).
ScenarioConfig parse_config(const std::string& json_text);
/// Canonical JSON serialization (keys sorted, doubles round-trip exactly).
std::string emit_config(const ScenarioConfig& cfg);
ScenarioConfig load_config_file(const std::string& path);

/// Validates every module precondition the scenario will rely on, before
/// any solve starts.  Throws ValidationError describing the first problem.
void validate_config(const ScenarioConfig& cfg);

/// One named pass/fail measurement with the tolerance it was held against.
struct CheckItem {
  std::string name;
  bool pass = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string note;
};

/// In-memory CSV table: exact output bytes, so determinism can be checked
/// without touching the file system.
struct CsvTable {
  std::string file_name;
  std::string header;
  std::vector<std::string> rows;

  std::string bytes() const;
};

struct Report {
  ScenarioConfig scenario;
  std::string version;       ///< library + scheme revision tag
  double timing_ms = 0.0;
  std::vector<CheckItem> checks;
  std::vector<CsvTable> tables;
  std::string results_json;  ///< command-specific payload (JSON object)
};

/// Executes the configured pipeline: assemble, solve or iterate, analyze.
/// Module errors propagate with scenario context prepended.
Report run_scenario(const ScenarioConfig& cfg);

/// Full report document: {scenario, results, checks, timing_ms, version}.
/// Everything except timing_ms is deterministic.
std::string report_json(const Report& report);

/// Writes the CSV tables and the JSON report under dir (created on demand,
/// honoring write_csv / write_json); returns the written paths in order.
std::vector<std::string> emit_tables(const Report& report,
                                     const std::string& dir);

}  // namespace rflab
