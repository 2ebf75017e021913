// limbdyn <command> --config <path> --out <dir> [--seed N]

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "limbdyn/limbdyn.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Knee-ankle rehabilitation robot: axis placement, dynamics and control simulation"};
  app.set_version_flag("--version", std::string(limbdyn::kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  for (auto name : limbdyn::kCommands) {
    auto* sub = app.add_subcommand(std::string(name));
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (falls back to $LIMBDYN_OUT)");
    sub->add_option("--seed", seed, "optimizer RNG seed");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    limbdyn::ToolConfig cfg = limbdyn::load_config(config_path);
    if (seed) cfg.optimizer.de.rng_seed = *seed;
    if (out_dir.empty()) {
      if (const char* env = std::getenv("LIMBDYN_OUT"); env && *env) out_dir = env;
    }
    if (out_dir.empty()) out_dir = cfg.output_dir;
    if (out_dir.empty()) throw limbdyn::ConfigError("no output directory: pass --out or set LIMBDYN_OUT");

    const limbdyn::RunManifest m = limbdyn::run_command(command, cfg, out_dir);
    for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& f : m.outputs) std::cout << out_dir << "/" << f << "\n";
  } catch (const std::exception& e) {
    std::cerr << "limbdyn " << command << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
