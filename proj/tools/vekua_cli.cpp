#include "vekua/run.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Carleman-Vekua solver with a singular point"};
  app.require_subcommand(1, 1);
  vekua::CliOptions opt;
  std::string config;

  for (const char* mode : {"solve", "rh", "rh0", "verify", "convergence"}) {
    CLI::App* sub = app.add_subcommand(mode);
    auto* cfg = sub->add_option("--config", config, "JSON configuration file");
    if (std::string(mode) != "verify") cfg->required();
    sub->add_option("--out", opt.out_dir, "output directory")->capture_default_str();
    if (std::string(mode) == "verify")
      sub->add_flag("--mutate-kernel-sign", opt.mutate_kernel_sign,
                    "flip the area-kernel sign in the Pompeiu property (fault injection)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : vekua::kExitConfig;
  }
  if (!config.empty()) opt.config_path = config;
  const std::string mode = app.get_subcommands().front()->get_name();
  return vekua::run_command(mode, opt, std::cerr);
}
