#include "markovsa/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "markovsa/icg.hpp"

namespace markovsa {

namespace {

// salts for the independent random streams derived from the run seed
constexpr std::uint64_t kSaltOutputIndex = 0x6f75747075746964ULL;
constexpr std::uint64_t kSaltProbe = 0x70726f6265ULL;
constexpr std::uint64_t kSaltFinal = 0x66696e616cULL;
constexpr std::uint64_t kSaltZ0 = 0x7a30ULL;

}  // namespace

Schedule Schedule::state_dependent(double a, int horizon) {
  Schedule s;
  s.kind = ScheduleKind::StateDependent;
  s.a = a;
  s.horizon = horizon;
  s.validate();
  return s;
}

Schedule Schedule::state_independent(int horizon) {
  Schedule s;
  s.kind = ScheduleKind::StateIndependent;
  s.horizon = horizon;
  s.validate();
  return s;
}

Schedule Schedule::custom(std::vector<double> etas, std::vector<int> ts) {
  Schedule s;
  s.kind = ScheduleKind::Custom;
  s.horizon = static_cast<int>(etas.size());
  s.etas = std::move(etas);
  s.ts = std::move(ts);
  s.validate();
  return s;
}

void Schedule::validate() const {
  if (horizon < 1) {
    throw std::invalid_argument("Schedule: horizon must be at least 1");
  }
  if (kind == ScheduleKind::StateDependent && (a < 0.5 || a >= 1.0)) {
    throw std::invalid_argument("Schedule: requires 1/2 <= a < 1");
  }
  if (kind == ScheduleKind::Custom) {
    if (etas.empty()) {
      throw std::invalid_argument("Schedule: custom eta list is empty");
    }
    for (double e : etas) {
      if (!(e > 0.0) || e > 1.0) {
        throw std::invalid_argument("Schedule: eta entries must be in (0, 1]");
      }
    }
    for (int t : ts) {
      if (t < 1) {
        throw std::invalid_argument("Schedule: t entries must be >= 1");
      }
    }
  }
}

double eta_of(const Schedule& schedule, int k) {
  switch (schedule.kind) {
    case ScheduleKind::StateDependent:
      if (k < 1 || k > schedule.horizon + 1) {
        throw std::out_of_range("eta_of: k out of range");
      }
      return std::pow(static_cast<double>(schedule.horizon + k), -schedule.a);
    case ScheduleKind::StateIndependent:
      if (k < 1 || k > schedule.horizon + 1) {
        throw std::out_of_range("eta_of: k out of range");
      }
      return 1.0 / std::sqrt(static_cast<double>(schedule.horizon));
    case ScheduleKind::Custom:
      if (k < 1 || k > static_cast<int>(schedule.etas.size())) {
        throw std::out_of_range("eta_of: k out of range");
      }
      return schedule.etas[static_cast<std::size_t>(k - 1)];
  }
  throw std::logic_error("eta_of: unknown schedule kind");
}

int t_of(const Schedule& schedule, int k) {
  switch (schedule.kind) {
    case ScheduleKind::StateDependent:
      if (k < 1 || k > schedule.horizon) {
        throw std::out_of_range("t_of: k out of range");
      }
      return static_cast<int>(std::ceil(
          std::pow(static_cast<double>(schedule.horizon + k),
                   2.0 * schedule.a)));
    case ScheduleKind::StateIndependent:
      if (k < 1 || k > schedule.horizon) {
        throw std::out_of_range("t_of: k out of range");
      }
      return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(k))));
    case ScheduleKind::Custom:
      if (k < 1 || k > static_cast<int>(schedule.ts.size())) {
        throw std::out_of_range("t_of: k out of range");
      }
      return schedule.ts[static_cast<std::size_t>(k - 1)];
  }
  throw std::logic_error("t_of: unknown schedule kind");
}

int sample_output_index(const std::vector<double>& etas, Rng& rng) {
  if (etas.empty()) {
    throw std::invalid_argument("sample_output_index: empty weight list");
  }
  double total = 0.0;
  for (double e : etas) {
    if (!(e > 0.0)) {
      throw std::invalid_argument(
          "sample_output_index: weights must be positive");
    }
    total += e;
  }
  const double target = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    acc += etas[i];
    if (target < acc) {
      return static_cast<int>(i) + 1;
    }
  }
  return static_cast<int>(etas.size());
}

RunRecord iasa_run(StreamOracle& oracle, const FeasibleSet& set,
                   const RunConfig& config, const MetricProbe& probe) {
  if (config.N < 1) {
    throw std::invalid_argument("iasa_run: N must be at least 1");
  }
  if (!(config.beta > 0.0) || config.omega < 0.0) {
    throw std::invalid_argument("iasa_run: invalid beta/omega");
  }
  if (config.schedule.horizon != config.N &&
      config.schedule.kind != ScheduleKind::Custom) {
    throw std::invalid_argument("iasa_run: schedule horizon != N");
  }
  config.schedule.validate();
  probe.validate();
  const int N = config.N;
  if (config.schedule.kind == ScheduleKind::Custom &&
      static_cast<int>(config.schedule.etas.size()) < N + 1) {
    throw std::invalid_argument(
        "iasa_run: custom schedule needs at least N+1 eta entries");
  }

  RunRecord rec;
  set.check_dim(config.theta0);
  Point theta = config.theta0;
  if (!contains(set, theta, 1e-9)) {
    theta = project(set, theta);
    rec.notes = "theta0 was projected onto the feasible set";
  }

  oracle.reset(config.seed);
  if (oracle.theta_dim() != set.dim()) {
    throw std::invalid_argument("iasa_run: oracle/set dimension mismatch");
  }

  Point z;
  if (config.z0.size() > 0) {
    set.check_dim(config.z0);
    z = config.z0;
  } else {
    z = Point::zeros(set.dim());
    z.shape = theta.shape;
  }
  if (config.z0_mode == Z0Mode::Estimate) {
    z = estimate_mean_gradient(oracle, theta, config.z0_burn_in, config.z0_n,
                               mix_seed(config.seed, kSaltZ0));
  }

  const int cadence = probe.cadence > 0
                          ? probe.cadence
                          : std::max(1, (N + 99) / 100);

  std::vector<double> etas(static_cast<std::size_t>(N));
  for (int k = 1; k <= N; ++k) {
    etas[static_cast<std::size_t>(k - 1)] = eta_of(config.schedule, k);
  }
  Rng out_rng(mix_seed(config.seed, kSaltOutputIndex));
  rec.output_index = sample_output_index(etas, out_rng);

  const auto nan = std::numeric_limits<double>::quiet_NaN();
  rec.eta = etas;
  rec.t_inner.assign(static_cast<std::size_t>(N), 0);
  rec.loss.assign(static_cast<std::size_t>(N), nan);
  rec.v_hat.assign(static_cast<std::size_t>(N), nan);
  rec.fw_gap_hat.assign(static_cast<std::size_t>(N), nan);
  rec.sfo_calls_cum.assign(static_cast<std::size_t>(N), 0);
  rec.lmo_calls_cum.assign(static_cast<std::size_t>(N), 0);

  const IcgParams base_icg{config.beta, config.omega, 1};

  for (int k = 1; k <= N; ++k) {
    const std::size_t idx = static_cast<std::size_t>(k - 1);
    try {
      // subproblem at (theta_k, z_k)
      Point y;
      if (config.mode == SolveMode::Projection) {
        y = solve_exact(set, z, theta, config.beta);
        ++rec.projection_calls;
      } else {
        IcgParams params = base_icg;
        params.iterations = t_of(config.schedule, k);
        rec.t_inner[idx] = params.iterations;
        IcgResult res = icg_solve_ex(set, z, theta, params);
        rec.lmo_calls += res.lmo_calls;
        y = std::move(res.w);
      }

      // probes on (theta_k, z_k); cloned oracles keep the main counters clean
      const bool probe_now = (probe.compute_v || probe.compute_fw_gap) &&
                             ((k - 1) % cadence == 0 || k == N);
      if (probe_now) {
        const Point grad_hat = estimate_mean_gradient(
            oracle, theta, probe.burn_in, probe.n,
            mix_seed(config.seed,
                     mix_seed(kSaltProbe, static_cast<std::uint64_t>(k))));
        if (probe.compute_v) {
          rec.v_hat[idx] =
              suboptimality_v(set, theta, z, grad_hat, config.beta);
        }
        if (probe.compute_fw_gap) {
          rec.fw_gap_hat[idx] = fw_gap(set, theta, grad_hat);
        }
      }
      if (probe.theta_snapshot_cadence > 0 &&
          (k - 1) % probe.theta_snapshot_cadence == 0) {
        rec.theta_snapshots.emplace_back(k, theta);
      }
      if (k == rec.output_index) {
        rec.theta_out = theta;
        rec.z_out = z;
      }

      // chain step and gradient at the pre-update iterate theta_k
      const Sample sample = oracle.step(theta);
      const Point g = oracle.stoch_grad(theta, sample);
      ++rec.sfo_calls;
      if (probe.compute_loss) {
        rec.loss[idx] = oracle.loss(theta, sample);
      }

      const double eta_next = eta_of(config.schedule, k + 1);
      theta.values += eta_next * (y.values - theta.values);
      z.values = (1.0 - eta_next) * z.values + eta_next * g.values;

      rec.sfo_calls_cum[idx] = rec.sfo_calls;
      rec.lmo_calls_cum[idx] = rec.lmo_calls;
      rec.iterations_completed = k;

      if (!theta.is_finite() || !z.is_finite()) {
        rec.aborted = true;
        rec.abort_reason = "non-finite iterate at k=" + std::to_string(k);
        break;
      }
    } catch (const std::runtime_error& e) {
      // oracle divergence becomes a diagnostic record, not an exception
      rec.aborted = true;
      rec.abort_reason = std::string(e.what()) + " at k=" + std::to_string(k);
      break;
    }
  }

  rec.theta_final = theta;
  rec.z_final = z;

  if (!rec.aborted && probe.final_v) {
    const int fb = probe.final_burn_in > 0 ? probe.final_burn_in
                                           : probe.burn_in;
    const int fn = probe.final_n > 0 ? probe.final_n : probe.n;
    try {
      const Point grad_hat = estimate_mean_gradient(
          oracle, rec.theta_out, fb, fn, mix_seed(config.seed, kSaltFinal));
      rec.v_out = suboptimality_v(set, rec.theta_out, rec.z_out, grad_hat,
                                  config.beta);
    } catch (const std::runtime_error& e) {
      rec.aborted = true;
      rec.abort_reason = std::string(e.what()) + " during the final probe";
    }
  }
  return rec;
}

}  // namespace markovsa
