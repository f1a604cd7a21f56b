// sim: command-line driver for the three-grating interferometer simulator.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Three-grating electron interferometer simulator"};
  app.set_version_flag("--version", std::string(sim::kVersion));
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  for (const auto& name : sim::command_names()) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [output] directory)");
    sub->add_option("--seed", seed, "random seed (overrides [run] seed)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    sim::RunContext ctx;
    ctx.config = sim::load_config(config_path);
    if (out_dir) ctx.config.output_directory = *out_dir;
    if (seed) ctx.config.seed = *seed;
    ctx.out_dir = ctx.config.output_directory;
    ctx.log = &std::cout;
    return sim::run_command(app.get_subcommands().front()->get_name(), ctx);
  } catch (...) {
    return sim::exit_status_for_current_exception(std::cerr);
  }
}
