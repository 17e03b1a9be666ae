#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "markovsa/harness.hpp"
#include "markovsa/version.hpp"

namespace {

std::vector<int> parse_grid(const std::string& spec) {
  std::vector<int> grid;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    grid.push_back(std::stoi(item));
  }
  return grid;
}

void print_summary(const markovsa::SummaryReport& report) {
  if (report.sweep_points.empty()) {
    std::printf("repetitions: %zu\n", report.reps.size());
    int aborted = 0;
    for (const auto& r : report.reps) {
      aborted += r.aborted ? 1 : 0;
    }
    if (aborted > 0) {
      std::printf("aborted repetitions: %d\n", aborted);
    }
    std::printf("mean final loss: %.6g\n", report.mean_final_loss);
    std::printf("mean final V_hat: %.6g\n", report.mean_final_v_hat);
    std::printf("mean V(theta_R, z_R): %.6g\n", report.mean_v_out);
  } else {
    for (const auto& p : report.sweep_points) {
      std::printf("  N=%d   mean V(theta_R, z_R)=%.6g\n", p.N, p.mean_v_out);
    }
    if (report.sweep_slope) {
      std::printf("fitted log-log slope: %.4f\n", *report.sweep_slope);
    } else {
      std::printf("fitted log-log slope: (not available)\n");
    }
  }
  std::printf("wall clock: %.2f s\n", report.wall_seconds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projection-based and projection-free stochastic "
               "approximation over Markovian data streams"};
  app.set_version_flag("--version", markovsa::kVersion);
  app.require_subcommand(1);

  std::string config_path, grid_spec = "250,1000,4000", agents_path;
  std::uint64_t check_seed = 12345;

  auto* run_cmd =
      app.add_subcommand("run", "Run an experiment from a JSON config");
  run_cmd->add_option("config", config_path, "experiment config (JSON)")
      ->required();

  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Run an experiment over a grid of horizons N and fit the "
               "log-log convergence slope");
  sweep_cmd->add_option("config", config_path, "experiment config (JSON)")
      ->required();
  sweep_cmd->add_option("--grid", grid_spec,
                        "comma-separated increasing N values");

  auto* check_cmd =
      app.add_subcommand("check", "Run the property / invariant suite");
  check_cmd->add_option("--seed", check_seed, "suite seed");

  auto* ingest_cmd = app.add_subcommand(
      "ingest", "Validate an agent-features CSV (label,f1..fd)");
  ingest_cmd->add_option("csv", agents_path, "agents CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      const auto config = markovsa::load_experiment_config(config_path);
      const auto report = markovsa::run_experiment(config);
      print_summary(report);
      std::printf("artifacts in %s\n",
                  markovsa::effective_output_dir(config).c_str());
    } else if (*sweep_cmd) {
      const auto config = markovsa::load_experiment_config(config_path);
      const auto grid = parse_grid(grid_spec);
      const auto report = markovsa::sweep(config, grid);
      print_summary(report);
      std::printf("artifacts in %s\n",
                  markovsa::effective_output_dir(config).c_str());
    } else if (*check_cmd) {
      const auto report = markovsa::property_suite(check_seed);
      int failed = 0;
      for (const auto& item : report.items) {
        std::printf("[%s] %s%s%s\n", item.pass ? "PASS" : "FAIL",
                    item.name.c_str(), item.pass ? "" : ": ",
                    item.detail.c_str());
        failed += item.pass ? 0 : 1;
      }
      std::printf("%zu checks, %d failed\n", report.items.size(), failed);
      return failed == 0 ? 0 : 1;
    } else if (*ingest_cmd) {
      const auto table = markovsa::ingest_agents(agents_path);
      std::printf("ok: %ld agents, %ld features\n",
                  static_cast<long>(table.features.rows()),
                  static_cast<long>(table.features.cols()));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
