#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "aht/runner.hpp"

namespace {

int run_command(const std::string& command, const std::string& config_path, const aht::CliOverrides& base) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "cannot read config " << config_path << "\n";
    return aht::kExitConfigError;
  }
  std::stringstream text;
  text << in.rdbuf();
  aht::CliOverrides overrides = base;
  overrides.command = command;
  const aht::RunOutput output = aht::execute(text.str(), overrides);

  const std::string& out = output.out;
  if (out.empty()) {
    std::cout << output.report;
  } else {
    try {
      for (const auto& path : aht::write_outputs(output, out)) std::cerr << "wrote " << path << "\n";
    } catch (const std::exception& e) {
      std::cerr << e.what() << "\n";
      return aht::kExitConfigError;
    }
  }
  return output.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diagnostics and flows for almost Hermitian structures"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  double tol = 0.0;
  std::uint64_t seed = 0;
  std::string chosen;
  const std::pair<const char*, const char*> commands[] = {
      {"inspect", "per-point residuals, classification and expected-value checks"},
      {"verify", "inspect plus class criteria, equivalence agreement and closed-form constants"},
      {"classify", "Gray-Hervella class of the sampled structure"},
      {"flow", "gradient descent of the total bending on a flat torus grid"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "report path (flow also writes <stem>.trace.csv and <stem>.grid.json)");
    sub->add_option("--tol", tol, "residual tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "point-sampling seed (flow: random start seed)");
    sub->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : aht::kExitConfigError;
  }

  aht::CliOverrides overrides;
  if (!out.empty()) overrides.out = out;
  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--tol")) overrides.tol = tol;
    if (sub->count("--seed")) overrides.seed = seed;
  }
  return run_command(chosen, config, overrides);
}
