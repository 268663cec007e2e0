#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lcs/commands.hpp"
#include "lcs/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dual-system Lagrangian coherent structure tools"};
  std::string command_name;
  std::string config_path;
  std::string out_dir;
  unsigned workers = 0;
  std::vector<std::string> overrides;
  bool dry_run = false;

  app.add_option("command", command_name,
                 "ftle | line-sweep | classical-poincare | dual-poincare | classify | sphere | "
                 "fd-compare (defaults to run.command)");
  app.add_option("-c,--config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  app.add_option("-o,--out", out_dir, "Output directory (default: run.out or .)");
  app.add_option("-w,--workers", workers, "Worker threads (default: run.workers or 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--command-overrides", overrides, "Config overrides as section.key=value")
      ->expected(1, -1);
  app.add_flag("--dry-run", dry_run, "Validate the config, print the resolved settings and exit");
  CLI11_PARSE(app, argc, argv);

  std::ifstream in(config_path);
  std::stringstream text;
  text << in.rdbuf();
  lcs::RunConfig cfg;
  try {
    std::optional<lcs::Command> cmd;
    if (!command_name.empty()) cmd = lcs::parse_command(command_name);
    cfg = lcs::parse_config(text.str(), overrides, cmd);
    if (!cfg.command) {
      std::cerr << "error: no command given on the command line or in run.command\n";
      return 2;
    }
  } catch (const lcs::ConfigError& e) {
    std::cerr << config_path << ": " << e.what() << "\n";
    return 2;
  }
  if (workers > 0) cfg.workers = workers;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (dry_run) {
    for (const auto& [key, value] : cfg.resolved()) std::cout << key << " = " << value << "\n";
    std::cout << "# config hash " << cfg.hash_hex() << ", " << cfg.seeds.generate().size() << " seeds\n";
    return 0;
  }

  try {
    const lcs::RunReport report = lcs::run_command(cfg, cfg.out_dir, std::cerr);
    for (const auto& a : report.artifacts) {
      std::cerr << "wrote " << a.file;
      if (a.file.ends_with(".csv")) std::cerr << " (" << a.rows << " rows)";
      std::cerr << "\n";
    }
  } catch (const lcs::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
