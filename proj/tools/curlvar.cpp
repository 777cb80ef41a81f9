#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "curlvar/cli_io.hpp"
#include "curlvar/errors.hpp"

using nlohmann::json;

int main(int argc, char** argv) {
  CLI::App app{"Ground states of the critical curl-curl problem on a box"};
  app.require_subcommand(0, 1);

  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 0, count = 0, max_iter = 0;
  double lambda = 0.0, tol = 0.0, eps = 0.0;
  std::vector<double> lambdas, box;
  std::vector<int> grid;
  bool snapshot = false;

  // Options apply with or without a subcommand and in any position.
  app.fallthrough();
  auto* o_config = app.add_option("--config", config_path, "TOML-style or JSON config file")->check(CLI::ExistingFile);
  auto* o_out = app.add_option("--out", out, "Output directory");
  auto* o_seed = app.add_option("--seed", seed, "Descent seed");
  auto* o_threads = app.add_option("--threads", threads, "Worker threads (default: CURLVAR_THREADS, then all cores)");
  app.add_flag("--snapshot", snapshot, "Write field snapshots");
  auto* o_lambda = app.add_option("--lambda", lambda, "lambda for bn");
  auto* o_lambdas = app.add_option("--lambdas", lambdas, "Ascending lambda list for bn-sweep")->delimiter(',');
  auto* o_count = app.add_option("--count", count, "Number of eigenpairs");
  auto* o_grid = app.add_option("--grid", grid, "Cells per axis (one value or three)")->delimiter(',');
  auto* o_box = app.add_option("--box", box, "Edge lengths (one value or three)")->delimiter(',');
  auto* o_tol = app.add_option("--tol", tol, "Descent tolerance");
  auto* o_max_iter = app.add_option("--max-iter", max_iter, "Descent iteration cap");
  auto* o_eps = app.add_option("--eps", eps, "Instanton width for the Sobolev oracle");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"groundstate", "Minimize the curl Sobolev quotient (lambda = 0)"},
      {"spectrum", "Lowest curl-curl eigenvalue clusters"},
      {"bn", "c_lambda for one lambda <= 0"},
      {"bn-sweep", "c_lambda over an ascending lambda list"},
      {"sobolev-oracle", "Cutoff instanton quotient on the grid"},
      {"verify", "Invariant suite with a pass/fail table"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  CLI11_PARSE(app, argc, argv);

  json overrides = json::object();
  for (const auto* sub : app.get_subcommands()) overrides["command"] = sub->get_name();
  if (*o_out) overrides["out"] = out;
  if (*o_seed) overrides["seed"] = seed;
  if (*o_threads) overrides["threads"] = threads;
  if (snapshot) overrides["snapshot"] = true;
  if (*o_lambda) overrides["lambda"] = lambda;
  if (*o_lambdas) overrides["lambdas"] = lambdas;
  if (*o_count) overrides["count"] = count;
  if (*o_grid) overrides["grid"] = grid.size() == 1 ? json(grid[0]) : json(grid);
  if (*o_box) overrides["box"] = box.size() == 1 ? json(box[0]) : json(box);
  if (*o_tol) overrides["tol"] = tol;
  if (*o_max_iter) overrides["max_iter"] = max_iter;
  if (*o_eps) overrides["eps"] = eps;

  std::string text;
  if (*o_config) {
    std::ifstream f(config_path, std::ios::binary);
    std::ostringstream buffer;
    buffer << f.rdbuf();
    text = buffer.str();
  }

  curlvar::RunConfig config;
  try {
    config = curlvar::parse_config(text, overrides);
  } catch (const curlvar::ConfigError& e) {
    json record = curlvar::error_record(e);
    record["exit_code"] = curlvar::kExitConfig;
    if (*o_config) record["path"] = config_path;
    std::cerr << record.dump() << "\n";
    return curlvar::kExitConfig;
  }
  return curlvar::run(config, std::cout);
}
