// Acceptance suite: runs the bundled scenario for every criterion, checks
// its assertions and its runtime budget, and prints one line per criterion.

#include "geotr/scenario.hpp"

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

namespace {

struct Criterion {
  int id;
  const char* title;
  const char* file;
  double budget_seconds;
};

const std::vector<Criterion> kCriteria = {
    {1, "density bounds", "density_bounds.toml", 10},
    {2, "representation formula", "representation_formula.toml", 5},
    {3, "Lagrangian/Eulerian VAE equivalence", "vae_equivalence.toml", 120},
    {4, "Lie derivative duality", "lie_duality.toml", 10},
    {5, "GTE weak residual", "gte_residual.toml", 30},
    {6, "Duhamel formula", "duhamel.toml", 30},
    {7, "Frobenius commutativity", "frobenius_rotation_dilation.toml", 30},
    {8, "invariance under rotation", "invariance.toml", 20},
    {9, "lifted flow", "lifted_flow.toml", 20},
    {10, "frozen field lines (Alfven)", "alfven_rotation3d.toml", 300},
};

}  // namespace

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  fs::path dir = GEOTR_SCENARIO_DIR;
  fs::path out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "geotr_acceptance";
  int failures = 0;
  for (const auto& c : kCriteria) {
    auto t0 = std::chrono::steady_clock::now();
    auto o = geotr::scenario::run_file(dir / c.file, out);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = secs <= c.budget_seconds;
    bool ok = o.pass() && in_time;
    failures += ok ? 0 : 1;
    std::printf("[%s] criterion %2d: %-38s %7.2fs (budget %.0fs)", ok ? "PASS" : "FAIL", c.id, c.title, secs,
                c.budget_seconds);
    if (!o.pass()) std::printf("  %s", o.reason.c_str());
    if (!in_time) std::printf("  over time budget");
    std::printf("\n");
    for (const auto& ch : o.checks)
      std::printf("         %-4s %-44s value=%-12.4g bound=%.4g\n", ch.pass ? "ok" : "FAIL", ch.name.c_str(), ch.value,
                  ch.bound);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(kCriteria.size()) - failures, kCriteria.size());
  return failures == 0 ? 0 : 1;
}
