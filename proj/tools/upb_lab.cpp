#include <iostream>

#include "CLI11.hpp"
#include "upb/app.hpp"

using namespace upb::app;

int main(int argc, char** argv) {
  CLI::App cli{"Numerical lab for photon antibunching in weakly nonlinear coupled cavities"};
  cli.require_subcommand(1);
  RunOptions opt;
  std::string config_path;
  int cutoff = 0;
  std::string resolution;

  auto* run_cmd = cli.add_subcommand("run", "run an experiment config and write CSV plus manifest.json");
  run_cmd->add_option("config", config_path, "experiment config (INI)")->required();
  run_cmd->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
  run_cmd->add_option("--workers", opt.workers, "worker threads (default: number of processors)")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--cutoff", cutoff, "override the basis cutoff")->check(CLI::PositiveNumber);
  run_cmd->add_option("--resolution", resolution, "grid resolution")->check(CLI::IsMember({"low", "paper"}));

  auto* val_cmd = cli.add_subcommand("validate", "check a config without running it");
  val_cmd->add_option("config", config_path, "experiment config (INI)")->required();
  val_cmd->add_option("--cutoff", cutoff, "override the basis cutoff")->check(CLI::PositiveNumber);
  val_cmd->add_option("--resolution", resolution, "grid resolution")->check(CLI::IsMember({"low", "paper"}));

  cli.add_subcommand("list-experiments", "list the available experiments");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (cutoff > 0) opt.cutoff = cutoff;
  if (!resolution.empty()) opt.resolution = resolution;

  if (cli.got_subcommand("list-experiments")) {
    for (const auto& e : experiments()) std::cout << e.name << "\t" << e.description << "\n";
    return 0;
  }

  Config cfg;
  try {
    cfg = Config::load(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  if (cli.got_subcommand("validate")) {
    const auto rep = validate(cfg, opt);
    for (const auto& e : rep.errors) std::cerr << "error: " << e << "\n";
    if (!rep.ok()) return 1;
    std::cout << "OK " << cfg.name() << "\n";
    for (const auto& n : rep.notes) std::cout << "  " << n << "\n";
    return 0;
  }
  return run(cfg, opt, std::cerr).exit_code;
}
