#include "sgcalc/runner.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"sgcalc: semigroup calculus experiments on weighted graphs"};
  app.require_subcommand(1);

  sgcalc::CliRequest req;
  std::string config, out = "sgcalc-out";
  std::uint64_t seed = 0;
  std::vector<std::size_t> levels;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"geometry", "doubling, comparison and Poincare constants"},
      {"semigroup", "semigroup laws, dense vs Chebyshev oracle, limits, off-diagonal decay"},
      {"bmo", "semigroup and classical BMO norms"},
      {"carleson", "Carleson norms against squared BMO norms"},
      {"paraproduct", "reproducing and product residuals, mixed-norm paraproduct estimates"},
      {"weights", "A_p / RH_q characteristics and duality checks"},
      {"t1-check", "T(1) hypothesis report for an operator"},
      {"sweep", "run the configured suite across refinement levels"},
      {"run", "run every suite listed in the config"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "root seed (overrides the config)");
    sub->add_option("--levels", levels, "refinement levels, e.g. 16,32,64")->delimiter(',');
    sub->callback([&req, name = name] { req.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (!config.empty()) req.config = config;
  req.out = out;
  for (CLI::App* sub : app.get_subcommands())
    if (sub->count("--seed")) req.seed = seed;
  req.levels = levels;
  return sgcalc::run_cli(req, std::cerr, std::cerr);
}
