#pragma once

#include <array>
#include <cstdint>
#include <exception>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "curlvar/grid.hpp"
#include "json.hpp"

namespace curlvar {

enum class Command { groundstate, spectrum, bn, bn_sweep, sobolev_oracle, verify };

// "groundstate", "spectrum", "bn", "bn-sweep", "sobolev-oracle", "verify".
std::string to_string(Command command);
// ConfigError naming "command" for anything else.
Command command_from_string(const std::string& name);

struct RunConfig {
  Command command = Command::groundstate;
  std::array<int, 3> grid{32, 32, 32};
  std::array<double, 3> box{std::numbers::pi, std::numbers::pi, std::numbers::pi};
  std::array<double, 3> origin{0.0, 0.0, 0.0};
  // Outer descent stop (relative Riemannian gradient).
  double tol = 1e-5;
  double inner_tol = 1e-8;
  double eigen_tol = 1e-8;
  // Slack for comparisons against c0 and the bounds.
  double bn_tol = 1e-6;
  double plateau_tol = 1e-3;
  int max_iter = 300;
  // Descent seeds; groundstate runs one descent per seed.
  std::vector<std::uint64_t> seeds{1};
  std::uint64_t eigen_seed = 2024;
  std::optional<double> lambda;
  std::vector<double> lambdas;
  // Eigenpairs to compute (spectrum, bn, bn-sweep).
  int count = 8;
  // Instanton width for the Sobolev oracle; absent means shortest edge / 16.
  std::optional<double> eps;
  int recenter_every = 25;
  double recenter_target = 0.1;
  bool quotient_symmetries = false;
  bool ansatz_start = true;
  // verify: random perturbations for the gap check.
  int gap_samples = 100;
  std::string out = "curlvar_out";
  // Write field snapshots (raw + VTK) next to the results.
  bool snapshot = false;
  // 0 keeps the default (CURLVAR_THREADS or the hardware).
  int threads = 0;

  bool operator==(const RunConfig&) const = default;
};

// Either a JSON object or a TOML-style document: `key = value` lines with
// numbers, "strings", true/false, the constant pi, flat [a, b, ...] arrays
// (which may span lines) and # comments. Keys are those of RunConfig, plus
// `seed` for a single seed; `grid` and `box` take a scalar for a cube.
// Throws ConfigError with line and column on syntax errors and unknown keys,
// and naming the field on invalid values.
RunConfig parse_config(const std::string& text);

// The same with top-level keys of `overrides` replacing those of the
// document before validation (a `seed` override drops `seeds` and the
// reverse).
RunConfig parse_config(const std::string& text, const nlohmann::json& overrides);

// Same keys and checks from an already parsed object.
RunConfig config_from_json(const nlohmann::json& j);

// Every field, in the form parse_config accepts.
nlohmann::json to_json(const RunConfig& config);

// Range checks (positive tolerances, lambda <= 0, ascending lambdas, ...).
void validate(const RunConfig& config);

GridSpec grid_of(const RunConfig& config);

struct StageRecord {
  std::string name;
  double seconds = 0.0;
  nlohmann::json residuals;
  bool operator==(const StageRecord&) const = default;
};

struct RunManifest {
  nlohmann::json config;
  std::string version;
  std::vector<StageRecord> stages;
  nlohmann::json environment;
  // Cached lambda = 0 reference {c0, S_bar, converged, iterations} (bn runs).
  nlohmann::json c0;
  // Machine-readable error {kind, message, ...} when the run failed.
  nlohmann::json error;
  // Named booleans such as concentration or non-convergence.
  nlohmann::json flags;
  int exit_code = 0;
  bool operator==(const RunManifest&) const = default;
};

nlohmann::json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& j);

// Compiler, library versions, host architecture and thread count.
nlohmann::json environment_fingerprint();

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitInvariant = 4;

// ConfigError, DomainError, UnderResolvedSpectrum: 2. SolverFailure,
// NumericalFailure: 3. Anything else: 4.
int exit_code_for(const std::exception& e);

// {kind, message} plus field/line/column for ConfigError and
// residual/iterations for SolverFailure.
nlohmann::json error_record(const std::exception& e);

// Runs the command and writes manifest.json and result.json (plus sweep.csv
// and field snapshots where they apply) into config.out. result.json holds no
// timing, so identical configs give identical bytes. Progress and tables go
// to `log`. On failure error.json is written as well. Returns the exit code.
int run(const RunConfig& config, std::ostream& log);

}  // namespace curlvar
