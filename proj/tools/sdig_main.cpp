#include "sdig/cli.hpp"
#include "sdig/error.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Decentralized gradient-tracking experiments (DIGing, S-DIGing, primal-dual)"};
  app.require_subcommand(1);
  app.fallthrough();

  sdig::cli::GlobalOptions global;
  std::uint64_t seed_override = 0;
  std::string output_dir;
  auto* seed_opt = app.add_option("--seed-override", seed_override, "Replace the run seed from the config");
  auto* dir_opt = app.add_option("--output-dir", output_dir, "Directory for all output files");
  app.add_flag("--quiet", global.quiet, "Suppress human-readable summaries");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the configured experiment and write a trace");
  run->add_option("config", config_path, "Experiment config file")->required();

  auto* certify = app.add_subcommand("certify", "Print the linear-rate certificate");
  certify->add_option("config", config_path, "Experiment config file")->required();

  std::string algos = "diging,sdiging";
  double target = -3.0;
  auto* compare = app.add_subcommand("compare", "Compare algorithms on one instance");
  compare->add_option("config", config_path, "Experiment config file")->required();
  compare->add_option("--algos", algos, "Comma-separated algorithm list")->capture_default_str();
  compare->add_option("--target", target, "Target residual_log10")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sdig::cli::kExitUsage;
  }
  if (*seed_opt) global.seed_override = seed_override;
  if (*dir_opt) global.output_dir = output_dir;

  if (*run) return sdig::cli::cmd_run(config_path, global, std::cout, std::cerr);
  if (*certify) return sdig::cli::cmd_certify(config_path, global, std::cout, std::cerr);
  std::vector<sdig::Algorithm> list;
  try {
    list = sdig::cli::parse_algorithm_list(algos);
  } catch (const sdig::Error& e) {
    std::cerr << sdig::error_code_name(e.code()) << ": " << e.what() << '\n';
    return sdig::cli::kExitUsage;
  }
  return sdig::cli::cmd_compare(config_path, list, target, global, std::cout, std::cerr);
}
