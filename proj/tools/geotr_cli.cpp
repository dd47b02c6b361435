// Command-line runner for scenario files.
//
//   geotr run <config>... [--out DIR] [--dt X] [--res N] [--seed N]
//   geotr converge <config> --levels N [--out DIR] [--dt X] [--res N] [--seed N]
//   geotr list-builtins

#include "geotr/scenario.hpp"

#include <algorithm>
#include <iostream>

#include "CLI11.hpp"

namespace {

using geotr::scenario::ExitCode;
using geotr::scenario::Outcome;

void print_outcome(const Outcome& o, const std::filesystem::path& dir) {
  std::cout << (o.pass() ? "PASS " : "FAIL ") << o.scenario << " [" << o.experiment << "] -> " << dir.string()
            << '\n';
  for (const auto& c : o.checks)
    std::cout << "  " << (c.pass ? "ok   " : "FAIL ") << c.name << " value=" << c.value << " bound=" << c.bound
              << '\n';
  for (const auto& w : o.warnings) std::cout << "  warning: " << w << '\n';
  if (!o.reason.empty()) std::cout << "  reason: " << o.reason << '\n';
}

int worst(int a, int b) {
  // config errors outrank instabilities, which outrank assertion failures
  auto rank = [](int c) { return c == 2 ? 3 : c == 3 ? 2 : c; };
  return rank(a) >= rank(b) ? a : b;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transport of vector fields and 1-currents: scenario runner"};
  app.require_subcommand(1);

  std::string out_dir = "out";
  std::optional<double> dt;
  std::optional<int> res;
  std::optional<unsigned long> seed;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Output directory (one subdirectory per scenario)");
    sub->add_option("--dt", dt, "Override the flow integrator step");
    sub->add_option("--res", res, "Override the (base) grid resolution");
    sub->add_option("--seed", seed, "Override the random seed");
  };

  std::vector<std::string> configs;
  auto* run = app.add_subcommand("run", "Run one or more scenario files");
  run->add_option("configs", configs, "Scenario files")->required()->check(CLI::ExistingFile);
  add_common(run);

  std::string conv_config;
  int levels = 3;
  auto* conv = app.add_subcommand("converge", "Refinement study of a scenario");
  conv->add_option("config", conv_config, "Scenario file")->required()->check(CLI::ExistingFile);
  conv->add_option("--levels", levels, "Number of resolutions (base, 2x, 4x, ...)")->check(CLI::Range(2, 8));
  add_common(conv);

  auto* list = app.add_subcommand("list-builtins", "List builtin vector fields");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitCode::ConfigError);
  }

  if (list->parsed()) {
    for (const auto& n : geotr::builtin_names()) {
      auto f = geotr::builtin_field(n);
      std::cout << n << " (dim " << f.dim() << ")\n";
    }
    return 0;
  }

  geotr::scenario::Overrides ov{dt, res, seed};
  std::filesystem::path root(out_dir);
  int rc = 0;
  if (run->parsed()) {
    for (const auto& c : configs) {
      Outcome o = geotr::scenario::run_file(c, root, ov);
      print_outcome(o, root / o.scenario);
      rc = worst(rc, static_cast<int>(o.status));
    }
  } else if (conv->parsed()) {
    Outcome o = geotr::scenario::run_file(conv_config, root, ov, levels);
    print_outcome(o, root / o.scenario);
    rc = static_cast<int>(o.status);
  }
  return rc;
}
