// ctflow: classify, simulate, sweep and verify critical-threshold scenarios.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "ctflow/commands.hpp"
#include "ctflow/scenario.hpp"

namespace {

struct Flags {
  std::string scenario;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> eps_lo;
  std::optional<double> eps_hi;
  std::string suite = "all";
  bool json = false;
};

std::optional<ctflow::Scenario> load(const Flags& f) {
  try {
    ctflow::Scenario s = f.scenario.empty() ? ctflow::default_scenario()
                                            : ctflow::load_scenario(f.scenario);
    if (f.seed) {
      s.seed = *f.seed;
      for (auto& [key, value] : s.echo)
        if (key == "run.seed") value = std::to_string(*f.seed);
    }
    return s;
  } catch (const ctflow::ScenarioError& e) {
    std::cerr << "ctflow: " << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical-threshold classifier and simulator for 1D Euler-alignment flows"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* cmd, bool needs_scenario) {
    auto* opt = cmd->add_option("--scenario", f.scenario, "Scenario file (INI sections)");
    if (needs_scenario) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", f.out, "Output directory")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Seed for randomized draws (overrides [run] seed)");
  };

  auto* classify = app.add_subcommand("classify", "Pointwise threshold verdicts for the initial data");
  add_common(classify, true);
  auto* simulate = app.add_subcommand("simulate", "Integrate the scenario and write its artifacts");
  add_common(simulate, true);
  auto* sweep = app.add_subcommand("sweep", "Bisect the slope offset for the empirical threshold");
  add_common(sweep, true);
  sweep->add_option("--eps-lo", f.eps_lo, "Offset expected to blow up");
  sweep->add_option("--eps-hi", f.eps_hi, "Offset expected to survive");
  auto* verify = app.add_subcommand("verify", "Run a self-check suite");
  add_common(verify, false);
  verify->add_option("suite", f.suite, "invariants | oracles | thresholds | isothermal | all")
      ->capture_default_str();
  verify->add_flag("--json", f.json, "Print a JSON summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ctflow::exit_code::usage;
  }

  try {
    const std::filesystem::path out(f.out);
    if (verify->parsed()) {
      std::uint64_t seed = f.seed.value_or(0);
      if (!f.seed && !f.scenario.empty()) {
        const auto s = load(f);
        if (!s) return ctflow::exit_code::usage;
        seed = s->seed;
      }
      return ctflow::cmd_verify(f.suite, seed, f.json, std::cout);
    }
    const auto s = load(f);
    if (!s) return ctflow::exit_code::usage;
    if (classify->parsed()) return ctflow::cmd_classify(*s, out, std::cout);
    if (simulate->parsed()) return ctflow::cmd_simulate(*s, out, std::cout);
    if (sweep->parsed()) return ctflow::cmd_sweep(*s, f.eps_lo, f.eps_hi, out, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "ctflow: " << e.what() << "\n";
    return ctflow::exit_code::failure;
  }
  return ctflow::exit_code::usage;
}
