// Command-line driver: simulate, verify, rates, stability, uniqueness.
//
// Thread count: CSKIN_THREADS, else OMP_NUM_THREADS, else the OpenMP default.
// Results do not depend on it.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "cskin/commands.hpp"

namespace {

void apply_thread_env() {
  const char* s = std::getenv("CSKIN_THREADS");
  if (!s || !*s) return;  // OMP_NUM_THREADS is honoured by the runtime itself
  char* end = nullptr;
  const long n = std::strtol(s, &end, 10);
  if (end && *end == '\0' && n > 0) omp_set_num_threads(static_cast<int>(n));
  else std::cerr << "ignoring CSKIN_THREADS='" << s << "'\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic Cucker-Smale particle simulator and diagnostics"};
  app.require_subcommand(1);

  std::string config;
  std::vector<std::string> sets;
  double perturbation = 0.0;
  bool have_perturbation = false;
  long refine = 0;
  bool have_refine = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "key = value config file")->required();
    sub->add_option("--set", sets, "override key=value (repeatable)");
  };
  auto* simulate = app.add_subcommand("simulate", "integrate and write diagnostics");
  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  auto* rates = app.add_subcommand("rates", "fit decay rates against the regime envelope");
  auto* stability = app.add_subcommand("stability", "W_p stability against a perturbed copy");
  auto* uniqueness = app.add_subcommand("uniqueness", "deviation functional under time refinement");
  for (auto* s : {simulate, verify, rates, stability, uniqueness}) common(s);
  stability->add_option("--perturbation", perturbation, "velocity jitter magnitude")
      ->each([&](const std::string&) { have_perturbation = true; });
  uniqueness->add_option("--refine", refine, "time step refinement factor (>= 2)")
      ->each([&](const std::string&) { have_refine = true; });

  CLI11_PARSE(app, argc, argv);
  apply_thread_env();

  return cskin::run_guarded(
      [&]() -> int {
        if (have_perturbation) sets.push_back("stability.perturbation=" + std::to_string(perturbation));
        if (have_refine) {
          if (refine < 0) throw cskin::ConfigError("uniqueness.refine", "must be at least 2");
          sets.push_back("uniqueness.refine=" + std::to_string(refine));
        }
        const auto cfg = cskin::load_config(config, sets);
        if (*simulate) return cskin::cmd_simulate(cfg, std::cout);
        if (*verify) return cskin::cmd_verify(cfg, std::cout);
        if (*rates) return cskin::cmd_rates(cfg, std::cout);
        if (*stability) return cskin::cmd_stability(cfg, std::cout);
        return cskin::cmd_uniqueness(cfg, std::cout);
      },
      std::cerr);
}
