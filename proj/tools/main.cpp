// transitq: queueing statistics for a transit line with random service
// suspensions, plus the simulator used to check them.

#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace transitq::cli;

  CLI::App app{"Queue and waiting-time statistics for a bus/rail line with random incidents"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Closed-form per-station report");
  analyze->add_option("--config", an.config, "Scenario JSON")->required();
  analyze->add_option("--out", an.out, "Output file (default: stdout)");
  analyze->add_option("--format", an.format, "csv or json")->capture_default_str();

  SimulateArgs si;
  auto* simulate = app.add_subcommand("simulate", "Discrete-event simulation of the same line");
  simulate->add_option("--config", si.config, "Scenario JSON")->required();
  simulate->add_option("--runs", si.runs, "Vehicle trips (>= 100)")->capture_default_str();
  simulate->add_option("--seed", si.seed, "Master seed")->capture_default_str();
  simulate->add_option("--warmup", si.warmup, "Fraction of early trips dropped")->capture_default_str();
  simulate->add_option("--out", si.out, "Output file (default: stdout)");
  simulate->add_option("--format", si.format, "csv or json")->capture_default_str();

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "One report per value of a parameter");
  sweep->add_option("--config", sw.config, "Base scenario JSON")->required();
  sweep->add_option("--param", sw.param,
                    "capacity | gamma | theta | nominal_headway | demand_factor")->required();
  sweep->add_option("--values", sw.values, "Comma-separated values")->required();
  sweep->add_option("--out", sw.out_dir, "Output directory")->required();
  sweep->add_flag("--simulate", sw.simulate, "Also simulate every scenario");
  sweep->add_option("--runs", sw.runs, "Vehicle trips per simulation")->capture_default_str();
  sweep->add_option("--seed", sw.seed, "Master seed")->capture_default_str();
  sweep->add_option("--warmup", sw.warmup, "Warmup fraction")->capture_default_str();
  sweep->add_option("--jobs", sw.jobs, "Worker threads (0: all cores)")->capture_default_str();

  CompareArgs co;
  auto* comp = app.add_subcommand("compare", "Theory vs simulation table");
  comp->add_option("--theory", co.theory, "Report from analyze (csv or json)")->required();
  comp->add_option("--sim", co.sim, "Stats from simulate (csv or json)")->required();
  comp->add_option("--out", co.out, "Output file (default: stdout)");
  comp->add_option("--format", co.format, "csv or json")->capture_default_str();
  comp->add_option("--tol-mean", co.tol.mean_rel, "Relative tolerance on means")->capture_default_str();
  comp->add_option("--tol-var", co.tol.sd_rel, "Relative tolerance on standard deviations")
      ->capture_default_str();
  comp->add_option("--abs-queue", co.tol.queue_abs, "Absolute floor for mean queue (passengers)")
      ->capture_default_str();
  comp->add_option("--abs-wait", co.tol.wait_abs, "Absolute floor for mean wait (minutes)")
      ->capture_default_str();

  RootsArgs ro;
  auto* roots = app.add_subcommand("roots", "Dump the denominator roots for one station");
  roots->add_option("--config", ro.config, "Scenario JSON")->required();
  roots->add_option("--station", ro.station, "Station index (1-based)")->required();
  roots->add_option("--out", ro.out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  if (*analyze) return cmd_analyze(an, std::cout, std::cerr);
  if (*simulate) return cmd_simulate(si, std::cout, std::cerr);
  if (*sweep) return cmd_sweep(sw, std::cout, std::cerr);
  if (*comp) return cmd_compare(co, std::cout, std::cerr);
  if (*roots) return cmd_roots(ro, std::cout, std::cerr);
  return kInputError;
}
