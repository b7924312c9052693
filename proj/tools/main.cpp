#include <cstdlib>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "parax/io.hpp"

int main(int argc, char** argv) {
  using namespace parax;
  CLI::App app{"Paraxial Vlasov-Maxwell field hierarchy and particle-in-cell solver"};
  app.set_version_flag("--version", io::version());
  app.require_subcommand(1, 1);

  std::string config;
  std::string out;
  std::optional<int> order;
  std::optional<std::uint64_t> seed;
  bool quiet = false;

  app.add_option("--config", config, "INI run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out, "Output directory (overrides PARAX_OUT and output.directory)");
  app.add_option("--order", order, "Truncation order n_max")->check(CLI::NonNegativeNumber);
  app.add_option("--seed", seed, "Particle sampling seed");
  app.add_flag("--quiet", quiet, "Suppress progress output");

  for (const char* verb : {"fields", "pic", "mms", "residual", "convergence"}) {
    auto* sub = app.add_subcommand(verb);
    sub->fallthrough();
  }
  app.get_subcommand("fields")->description("Solve the hierarchy for the configured analytic sources");
  app.get_subcommand("pic")->description("Run the particle-in-cell loop");
  app.get_subcommand("mms")->description("Grid convergence study of one manufactured case");
  app.get_subcommand("residual")->description("Scaled-Maxwell residual of the analytic source sequence");
  app.get_subcommand("convergence")->description("Residual scaling against eta");

  CLI11_PARSE(app, argc, argv);

  const io::Verb verb = io::parse_verb(app.get_subcommands().front()->get_name());
  io::RunConfig cfg;
  try {
    cfg = io::parse_config(config);
    if (order) cfg.hierarchy.n_max = *order;
    if (seed) cfg.pic.seed = *seed;
    if (!out.empty())
      cfg.output.directory = out;
    else if (const char* env = std::getenv("PARAX_OUT"); env && *env)
      cfg.output.directory = env;
    cfg.validate();
  } catch (const io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  io::RunOptions opt;
  opt.out = cfg.output.directory;
  opt.quiet = quiet;
  return io::run_command(verb, cfg, opt, std::clog, std::cerr);
}
