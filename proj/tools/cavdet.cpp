// SPDX-License-Identifier: Apache-2.0
//
// cavdet: simulation and analysis toolkit for cavity-enhanced atom
// detection. Subcommands: neff, simulate, analyze, table1, steady, zeeman.
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cavdet/commands.hpp"
#include "cavdet/config.hpp"
#include "cavdet/errors.hpp"

namespace {

struct GlobalArgs {
  std::string config_path;
  std::string preset;
  std::string out_dir = ".";
  std::string format = "csv";
  std::string counts_path;
  uint64_t seed = 0;
  bool seed_set = false;
  bool json_errors = false;
  int threads = 1;
};

cavdet::RunConfig load_config(const GlobalArgs& args) {
  cavdet::RunConfig config;
  if (!args.preset.empty()) {
    config = cavdet::RunConfig::preset(args.preset);
  }
  if (!args.config_path.empty()) {
    config = cavdet::RunConfig::from_file(args.config_path);
  }
  if (args.seed_set) config.seed = args.seed;
  return config;
}

int report_error(const GlobalArgs& args, const char* kind,
                 const std::string& message, int code) {
  if (args.json_errors) {
    nlohmann::json err;
    err["error"] = {{"kind", kind}, {"message", message}, {"exit_code", code}};
    std::cerr << err.dump() << '\n';
  } else {
    std::cerr << "cavdet: " << kind << ": " << message << '\n';
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cavity-enhanced atom detection simulator"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  GlobalArgs args;
  app.add_option("--config", args.config_path, "path to a JSON run config");
  app.add_option("--preset", args.preset,
                 "built-in config: paper-reflection, paper-fluorescence, table1");
  app.add_option("--seed", args.seed, "override the RNG seed")
      ->each([&](const std::string&) { args.seed_set = true; });
  app.add_option("--out", args.out_dir, "output directory (default .)");
  app.add_option("--format", args.format, "csv or json table rendering")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", args.threads, "worker threads for simulation");
  app.add_flag("--json-errors", args.json_errors,
               "emit machine-readable JSON errors on stderr");

  auto* neff = app.add_subcommand("neff", "N_eff distribution and moments");
  auto* simulate = app.add_subcommand("simulate", "synthetic photon counts");
  auto* analyze =
      app.add_subcommand("analyze", "g2 / variance / fidelity reports");
  analyze->add_option("--counts", args.counts_path,
                      "counts.csv produced by `simulate`");
  auto* table1 =
      app.add_subcommand("table1", "detection fidelity comparison table");
  auto* steady =
      app.add_subcommand("steady", "master-equation steady-state checks");
  auto* zeeman_cmd =
      app.add_subcommand("zeeman", "12-level optical pumping ratio");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is a validation failure
  }

  try {
    const cavdet::RunConfig config = load_config(args);
    cavdet::cli::CommandOptions options;
    options.out_dir = args.out_dir;
    options.format = args.format;
    options.counts_path = args.counts_path;
    options.threads = args.threads;

    nlohmann::json summary;
    if (neff->parsed()) summary = cavdet::cli::cmd_neff(config, options);
    if (simulate->parsed()) summary = cavdet::cli::cmd_simulate(config, options);
    if (analyze->parsed()) summary = cavdet::cli::cmd_analyze(config, options);
    if (table1->parsed()) {
      summary = cavdet::cli::cmd_table1(config, options);
      if (args.format == "csv") {
        std::cout << cavdet::cli::render_table1_text(summary);
        return 0;
      }
    }
    if (steady->parsed()) summary = cavdet::cli::cmd_steady(config, options);
    if (zeeman_cmd->parsed()) summary = cavdet::cli::cmd_zeeman(config, options);

    std::cout << summary.dump(2) << '\n';
    return 0;
  } catch (const cavdet::ValidationError& e) {
    return report_error(args, "validation", e.what(), 2);
  } catch (const cavdet::NumericalError& e) {
    return report_error(args, "numerical", e.what(), 3);
  } catch (const cavdet::IoError& e) {
    return report_error(args, "io", e.what(), 4);
  } catch (const std::exception& e) {
    return report_error(args, "internal", e.what(), 3);
  }
}
