#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "markovsa/geometry.hpp"
#include "markovsa/solver.hpp"
#include "markovsa/streams.hpp"

namespace markovsa {

// ---------------------------------------------------------------------------
// agent-table ingestion (optional real-data path for the strategic stream)

struct AgentTable {
  RowMatrixXd features;   // one agent per row
  Eigen::VectorXd labels; // +-1
};

// Strict CSV reader. Expects a header `label,f1,...,fd`, labels in
// {-1, +1} and numeric features; malformed input raises
// std::runtime_error naming the offending line.
AgentTable ingest_agents(const std::string& path);

void export_agents(const AgentTable& table, const std::string& path);

// ---------------------------------------------------------------------------
// experiment configuration (single strict JSON document)

enum class EnvKind { IidQuadratic, ArChain, Strategic, SingleIndex };

struct Theta0Spec {
  enum class Kind { Zeros, Gaussian, Vertex };
  Kind kind = Kind::Zeros;
  double scale = 0.1;  // gaussian only
};

struct ExperimentConfig {
  std::string name;

  EnvKind env_kind = EnvKind::IidQuadratic;
  IidQuadraticConfig iid;
  ArChainConfig ar;
  StrategicEnvConfig strategic;
  SingleIndexConfig single_index;

  SetKind set_kind = SetKind::L1Ball;
  double set_radius = 1.0;
  Eigen::VectorXd box_lo, box_hi;

  int N = 1;
  SolveMode mode = SolveMode::Projection;
  double beta = 1.0;
  double omega = 1.0;
  ScheduleKind schedule_kind = ScheduleKind::StateDependent;
  double schedule_a = 0.6;
  std::vector<double> custom_etas;
  std::vector<int> custom_ts;
  Theta0Spec theta0;
  Z0Mode z0_mode = Z0Mode::Zeros;
  int z0_burn_in = 500;
  int z0_n = 2000;

  MetricProbe probe;

  int repetitions = 1;
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  int threads = 0;  // 0 = hardware concurrency

  nlohmann::json echo;  // the parsed document, for the summary

  std::unique_ptr<StreamOracle> make_oracle() const;
  FeasibleSet make_set() const;
  Schedule make_schedule(int horizon) const;
  Point make_theta0(const FeasibleSet& set, std::uint64_t seed) const;
  RunConfig make_run_config(int horizon, std::uint64_t seed,
                            const FeasibleSet& set) const;
};

// Parses and validates; unknown keys anywhere are hard errors.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
ExperimentConfig load_experiment_config(const std::string& path);

// Builds a stream oracle from the `environment` section of an experiment
// config document.
std::unique_ptr<StreamOracle> make_oracle_from_json(const nlohmann::json& env);

// deterministic per-repetition seed from (master_seed, repetition index)
std::uint64_t rep_seed(std::uint64_t master_seed, int repetition);

// ---------------------------------------------------------------------------
// experiment execution and reporting

struct RepetitionSummary {
  int rep = 0;
  std::uint64_t seed = 0;
  double final_loss = 0.0;
  double final_v_hat = 0.0;
  double v_out = 0.0;
  double loss_first_decile = 0.0;
  double loss_last_decile = 0.0;
  double v_hat_first_decile = 0.0;
  double v_hat_last_decile = 0.0;
  int output_index = 0;
  long sfo_calls = 0;
  long lmo_calls = 0;
  long projection_calls = 0;
  bool aborted = false;
  std::string abort_reason;
};

struct SweepPoint {
  int N = 0;
  double mean_v_out = 0.0;
};

struct SummaryReport {
  nlohmann::json config_echo;
  std::vector<RepetitionSummary> reps;

  double mean_final_loss = 0.0, std_final_loss = 0.0;
  double mean_final_v_hat = 0.0, std_final_v_hat = 0.0;
  double mean_v_out = 0.0, std_v_out = 0.0;
  double mean_loss_first_decile = 0.0, mean_loss_last_decile = 0.0;
  double mean_v_hat_first_decile = 0.0, mean_v_hat_last_decile = 0.0;

  std::vector<SweepPoint> sweep_points;
  std::optional<double> sweep_slope;

  double wall_seconds = 0.0;  // reported on stdout, never serialized

  nlohmann::json to_json() const;
};

// Runs all repetitions (concurrently when threads allow), writes one
// per-iteration CSV per repetition plus an aggregate mean-curve CSV and a
// JSON summary under the effective output directory, and returns the
// summary. The MARKOVSA_OUTPUT_DIR environment variable overrides the
// configured output directory.
SummaryReport run_experiment(const ExperimentConfig& config);

// run_experiment per grid point (run.N replaced), then a log-log slope
// fit of mean V(theta_R, z_R) against N.
SummaryReport sweep(const ExperimentConfig& config,
                    const std::vector<int>& n_grid);

// ordinary least squares slope of log V against log N
double fit_loglog_slope(const std::vector<std::pair<double, double>>& pairs);

// mean of per-repetition records at every k; used for the aggregate CSV
std::vector<std::vector<double>> aggregate_mean_curves(
    const std::vector<RunRecord>& records);

std::string effective_output_dir(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// property / invariant suite

struct PropertyReport {
  struct Item {
    std::string name;
    bool pass = false;
    std::string detail;
  };
  std::vector<Item> items;

  bool all_pass() const {
    for (const auto& it : items) {
      if (!it.pass) {
        return false;
      }
    }
    return true;
  }
};

using LmoFn = std::function<Point(const FeasibleSet&, const Point&)>;

// LMO optimality against randomly sampled feasible points; the oracle
// under test is injectable so a corrupted implementation is caught.
PropertyReport::Item check_lmo_optimality(std::uint64_t seed,
                                          const LmoFn& lmo_fn);

// Runs every module's invariant checks at fixed sizes. Failures carry a
// counterexample description; they are data, not errors.
PropertyReport property_suite(std::uint64_t seed);

}  // namespace markovsa
