// Command-line driver: `run <config>`, `verify [--level quick|full]`,
// `resume <snapshot> <config>`. See README for the config schema and output
// formats. MUSKAT_OUTPUT_ROOT overrides the root of relative output paths.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "muskat/muskat.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral simulator for two-phase bubble interface dynamics"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "integrate a configured run and write outputs");
  run_cmd->add_option("config", config_path, "config file (JSON, or a manifest)")->required();

  std::string level = "quick";
  auto* verify_cmd = app.add_subcommand("verify", "run the property-verification suites");
  verify_cmd->add_option("--level", level, "suite size: quick or full")
      ->check(CLI::IsMember({"quick", "full"}));

  std::string snapshot_path, resume_config_path;
  auto* resume_cmd = app.add_subcommand("resume", "continue a run from a snapshot record");
  resume_cmd->add_option("snapshot", snapshot_path, "snapshot file")->required();
  resume_cmd->add_option("config", resume_config_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const muskat::RunConfig cfg = muskat::load_config_or_manifest(config_path);
      return muskat::run_command(cfg).exit_code;
    }
    if (verify_cmd->parsed()) {
      return muskat::verify_command(level == "full" ? muskat::VerifyLevel::full
                                                    : muskat::VerifyLevel::quick);
    }
    if (resume_cmd->parsed()) {
      const muskat::RunConfig cfg = muskat::load_config_or_manifest(resume_config_path);
      return muskat::resume_command(snapshot_path, cfg).exit_code;
    }
  } catch (const muskat::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
