#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "markovsa/geometry.hpp"
#include "markovsa/metrics.hpp"
#include "markovsa/point.hpp"
#include "markovsa/rng.hpp"
#include "markovsa/streams.hpp"

namespace markovsa {

enum class ScheduleKind { StateDependent, StateIndependent, Custom };

// Step-size / inner-iteration schedules over a horizon of N iterations.
// StateDependent: eta_k = (N+k)^-a with 1/2 <= a < 1, t_k = ceil((N+k)^2a).
// StateIndependent: eta_k = N^-1/2, t_k = ceil(sqrt(k)).
// Custom: explicit lookup tables.
struct Schedule {
  ScheduleKind kind = ScheduleKind::StateDependent;
  double a = 0.6;
  int horizon = 1;  // N
  std::vector<double> etas;
  std::vector<int> ts;

  static Schedule state_dependent(double a, int horizon);
  static Schedule state_independent(int horizon);
  static Schedule custom(std::vector<double> etas, std::vector<int> ts);

  void validate() const;
};

// Step size at iteration k. The update at iteration k consumes
// eta_{k+1}, so k up to N+1 is valid.
double eta_of(const Schedule& schedule, int k);

// Inner conditional-gradient iterations at iteration k, 1 <= k <= N.
int t_of(const Schedule& schedule, int k);

enum class SolveMode { Projection, ICG };

enum class Z0Mode { Zeros, Estimate };

struct RunConfig {
  int N = 1;
  SolveMode mode = SolveMode::Projection;
  double beta = 1.0;
  double omega = 1.0;
  Schedule schedule;
  Point theta0;
  Point z0;  // empty means zeros
  Z0Mode z0_mode = Z0Mode::Zeros;
  int z0_burn_in = 500;  // only used when z0_mode == Estimate
  int z0_n = 2000;
  std::uint64_t seed = 0;
};

// Per-iteration trajectory plus oracle accounting and the randomized
// output iterate. v_hat / fw_gap_hat are NaN at iterations that were not
// probed.
struct RunRecord {
  std::vector<double> eta;
  std::vector<int> t_inner;  // 0 in projection mode
  std::vector<double> loss;
  std::vector<double> v_hat;
  std::vector<double> fw_gap_hat;
  std::vector<long> sfo_calls_cum;
  std::vector<long> lmo_calls_cum;

  long sfo_calls = 0;
  long lmo_calls = 0;
  long projection_calls = 0;

  int output_index = 0;  // R, 1-based
  Point theta_out, z_out;
  double v_out = std::numeric_limits<double>::quiet_NaN();

  Point theta_final, z_final;
  std::vector<std::pair<int, Point>> theta_snapshots;

  bool aborted = false;
  std::string abort_reason;
  std::string notes;

  int iterations_completed = 0;
};

// Averaged stochastic approximation with inexact subproblem solves.
// Per iteration k = 1..N: solve the regularized subproblem at
// (theta_k, z_k) exactly (projection) or by the inner conditional-gradient
// loop with t_of(k) iterations; advance the chain with the pre-update
// iterate theta_k; then take the eta_{k+1}-weighted convex steps on theta
// and z. Probe evaluations clone the oracle and are excluded from the
// oracle counters.
RunRecord iasa_run(StreamOracle& oracle, const FeasibleSet& set,
                   const RunConfig& config, const MetricProbe& probe);

// Index in {1..N} with P(R = i) proportional to etas[i-1].
int sample_output_index(const std::vector<double>& etas, Rng& rng);

}  // namespace markovsa
