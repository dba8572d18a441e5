// Command-line front end. Talks to the library exclusively through the
// C API in pdqkd/pdqkd.h.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pdqkd/pdqkd.h"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  std::string scheme;
  std::string seed;
  double distance_km = 50.0;
};

int status_to_exit(pdq_status status) {
  switch (status) {
    case PDQ_OK: return 0;
    case PDQ_ERR_INVALID_CONFIG: return 2;
    case PDQ_ERR_VERIFICATION: return 3;
    case PDQ_ERR_NONCONVERGENCE: return 4;
    default: return 1;
  }
}

int fail(pdq_status status) {
  std::cerr << "error: " << pdq_last_error() << "\n";
  return status_to_exit(status);
}

pdq_status build_scenario(const CommonArgs& args, pdq_scenario** out) {
  pdq_status st;
  if (!args.config_path.empty())
    st = pdq_scenario_load(args.config_path.c_str(), out);
  else
    st = pdq_scenario_create(
        args.scheme.empty() ? "wcp-threshold" : args.scheme.c_str(), out);
  if (st != PDQ_OK) return st;
  if (!args.config_path.empty() && !args.scheme.empty()) {
    st = pdq_scenario_set(*out, "scheme", args.scheme.c_str());
    if (st != PDQ_OK) return st;
  }
  if (!args.seed.empty()) {
    st = pdq_scenario_set(*out, "seed", args.seed.c_str());
    if (st != PDQ_OK) return st;
  }
  return PDQ_OK;
}

int write_output(const std::string& path, const char* text) {
  if (!text) return 1;
  if (path.empty()) {
    std::cout << text;
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    return 1;
  }
  out << text;
  return 0;
}

void add_common(CLI::App* cmd, CommonArgs& args, bool with_distance = false) {
  cmd->add_option("--config", args.config_path, "scenario config file");
  cmd->add_option("--out", args.out_path, "output file (default: stdout)");
  cmd->add_option("--scheme", args.scheme,
                  "scheme name (overrides the config)");
  cmd->add_option("--seed", args.seed, "random seed for stochastic checks");
  if (with_distance)
    cmd->add_option("--distance", args.distance_km, "distance in km");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"passive decoy-state QKD key-rate calculator"};
  app.require_subcommand(1);

  CommonArgs args;
  auto* sweep = app.add_subcommand(
      "sweep", "optimize the key rate over the distance grid (CSV)");
  add_common(sweep, args);
  auto* cutoff = app.add_subcommand(
      "cutoff", "locate the zero-rate distance (JSON)");
  add_common(cutoff, args);
  auto* optimize = app.add_subcommand(
      "optimize", "optimize parameters at one distance (JSON)");
  add_common(optimize, args, /*with_distance=*/true);
  auto* verify = app.add_subcommand(
      "verify", "run the consistency checks (JSON)");
  add_common(verify, args);

  CLI11_PARSE(app, argc, argv);

  pdq_scenario* sc = nullptr;
  pdq_status st = build_scenario(args, &sc);
  if (st != PDQ_OK) return fail(st);

  pdq_result* res = nullptr;
  bool csv = false;
  if (sweep->parsed()) {
    st = pdq_run_sweep(sc, &res);
    csv = true;
  } else if (cutoff->parsed()) {
    st = pdq_run_cutoff(sc, &res);
  } else if (optimize->parsed()) {
    st = pdq_run_optimize(sc, args.distance_km, &res);
  } else {
    st = pdq_run_verify(sc, &res);
  }

  int exit_code = status_to_exit(st);
  if (res) {
    const char* text = csv ? pdq_result_csv(res) : pdq_result_json(res);
    const int write_rc = write_output(args.out_path, text);
    if (exit_code == 0) exit_code = write_rc;
    pdq_result_free(res);
  } else if (st != PDQ_OK) {
    std::cerr << "error: " << pdq_last_error() << "\n";
  }
  pdq_scenario_free(sc);
  return exit_code;
}
