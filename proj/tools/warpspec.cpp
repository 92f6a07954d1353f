#include <CLI11.hpp>

#include <map>

#include "warpspec/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"warped-end spectral toolkit"};
  app.require_subcommand(1);

  warpspec::cli::Invocation inv;
  std::string config, out = ".", grid;
  std::vector<std::string> sets;
  long modes = 0;

  const std::map<std::string, std::string> about{
      {"check", "check the curvature hypotheses on a window and fit constants"},
      {"thresholds", "evaluate the closed-form eigenvalue thresholds"},
      {"scan", "classify (mode, lambda) pairs of the separated radial operators"},
      {"counterexample", "run the critical oscillating-profile pipeline"},
      {"identity", "verify the integrated flux identity on configured and random cases"}};
  for (const auto& name : warpspec::cli::subcommands()) {
    auto* sub = app.add_subcommand(name, about.at(name));
    sub->add_option("--config", config, "configuration file (section.key = value)");
    sub->add_option("--out", out, "output directory");
    sub->add_option("--set", sets, "override section.key=value (repeatable)");
    sub->add_option("--modes", modes, "number of separated modes to scan");
    sub->add_option("--lambda-grid", grid, "lambda grid lo:hi:step");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : warpspec::cli::input_error;
  }

  inv.subcommand = app.get_subcommands().front()->get_name();
  inv.config_path = config;
  inv.out_dir = out;
  inv.overrides = sets;
  const auto* sub = app.get_subcommands().front();
  if (sub->count("--modes")) inv.modes = modes;
  if (sub->count("--lambda-grid")) inv.lambda_grid = grid;

  const int status = warpspec::cli::run(inv, std::cerr);
  std::ifstream verdict(std::filesystem::path(out) / "verdict.txt");
  std::string line;
  if (status != warpspec::cli::input_error && std::getline(verdict, line)) std::cout << line << '\n';
  return status;
}
