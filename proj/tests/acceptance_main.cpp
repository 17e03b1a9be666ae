// Acceptance suite: one check per shipped criterion, each printing a
// single PASS/FAIL line. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "markovsa/harness.hpp"
#include "markovsa/icg.hpp"
#include "markovsa/metrics.hpp"
#include "markovsa/rng.hpp"

using namespace markovsa;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Point random_point(Rng& rng, Eigen::Index n, double scale) {
  Point p = Point::zeros(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    p.values[j] = scale * rng.normal();
  }
  return p;
}

Point random_feasible(Rng& rng, const FeasibleSet& set, double scale) {
  Point p = random_point(rng, set.dim(), scale);
  if (set.kind() == SetKind::NuclearBall) {
    p.shape = Shape{set.rows(), set.cols()};
  }
  return project(set, p);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSingleIndexRunTemplate = R"json({
  "name": "single-index nuclear-norm experiment",
  "environment": {
    "type": "single_index",
    "d1": 10, "d2": 20, "v": 0.1,
    "spectral_radius": 0.4
  },
  "feasible_set": {"type": "nuclear_ball", "radius": 1.0},
  "run": {
    "N": 2000,
    "mode": "MODE",
    "beta": 1.0, "omega": 1.0,
    "schedule": {"kind": "state_dependent", "a": 0.6},
    "theta0": {"kind": "vertex"}
  },
  "probe": {
    "cadence": 20, "burn_in": 500, "n": 2000,
    "final_burn_in": 2000, "final_n": 20000
  },
  "repetitions": 50,
  "master_seed": 90210,
  "output_dir": "OUTDIR"
})json";

const char* kSweepTemplate = R"json({
  "name": "single-index rate sweep",
  "environment": {
    "type": "single_index",
    "d1": 10, "d2": 20, "v": 0.1,
    "spectral_radius": 0.8
  },
  "feasible_set": {"type": "nuclear_ball", "radius": 1.0},
  "run": {
    "N": 250,
    "mode": "projection",
    "beta": 1.0, "omega": 1.0,
    "schedule": {"kind": "state_dependent", "a": 0.6},
    "theta0": {"kind": "vertex"},
    "z0": {"kind": "estimate", "burn_in": 500, "n": 2000}
  },
  "probe": {
    "metrics": ["loss"],
    "final_v": true, "final_burn_in": 2000, "final_n": 20000
  },
  "repetitions": 20,
  "master_seed": 424242,
  "output_dir": "OUTDIR"
})json";

const char* kStrategicTemplate = R"json({
  "name": "synthetic strategic classification",
  "environment": {
    "type": "strategic",
    "agents": 200, "updates_per_step": 20, "feature_dim": 10,
    "modifiable": [1, 2, 3],
    "lambda": 0.01, "alpha": 0.005,
    "width": 16
  },
  "feasible_set": {"type": "l1_ball", "radius": 16.0},
  "run": {
    "N": 5000,
    "mode": "MODE",
    "beta": 1.0, "omega": 1.0,
    "schedule": {"kind": "state_dependent", "a": 0.6},
    "theta0": {"kind": "gaussian", "scale": 0.1}
  },
  "probe": {"metrics": ["loss"], "final_v": false},
  "repetitions": 10,
  "master_seed": 1337,
  "output_dir": "OUTDIR"
})json";

const char* kDeterminismTemplate = R"json({
  "name": "determinism check",
  "environment": {
    "type": "single_index",
    "d1": 4, "d2": 6, "v": 0.1,
    "spectral_radius": 0.5
  },
  "feasible_set": {"type": "nuclear_ball", "radius": 1.0},
  "run": {
    "N": 150,
    "mode": "icg",
    "schedule": {"kind": "state_dependent", "a": 0.6},
    "theta0": {"kind": "vertex"}
  },
  "probe": {"cadence": 25, "burn_in": 50, "n": 200},
  "repetitions": 3,
  "master_seed": 2718,
  "output_dir": "OUTDIR"
})json";

ExperimentConfig config_from_template(const std::string& tmpl,
                                      const std::string& mode,
                                      const std::string& outdir) {
  std::string doc = tmpl;
  const auto replace_all = [&doc](const std::string& from,
                                  const std::string& to) {
    for (std::size_t pos = doc.find(from); pos != std::string::npos;
         pos = doc.find(from, pos + to.size())) {
      doc.replace(pos, from.size(), to);
    }
  };
  replace_all("MODE", mode);
  replace_all("OUTDIR", outdir);
  return parse_experiment_config(nlohmann::json::parse(doc));
}

// --------------------------------------------------------------------------

Outcome criterion_1_icg_accuracy() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(11001);
  long checked = 0;
  for (int geometry = 0; geometry < 2; ++geometry) {
    for (int inst = 0; inst < 100; ++inst) {
      FeasibleSet set =
          geometry == 0
              ? FeasibleSet::l1_ball(0.5 + 2.0 * rng.uniform(),
                                     1 + rng.uniform_int(20))
              : FeasibleSet::nuclear_ball(0.5 + 2.0 * rng.uniform(),
                                          2 + rng.uniform_int(3),
                                          2 + rng.uniform_int(4));
      const Point theta = random_feasible(rng, set, 1.0);
      Point z = random_point(rng, set.dim(), 2.0);
      z.shape = theta.shape;
      const double beta = 1.0;
      const double omega = 1.0;
      const double D = set.diameter();
      const Point exact = solve_exact(set, z, theta, beta);
      for (int t : {5, 20, 100}) {
        const Point w = icg_solve(set, z, theta, {beta, omega, t});
        const double err2 = (w.values - exact.values).squaredNorm();
        const double bound = 4.0 * D * D * (1.0 + omega) / (t + 2);
        ++checked;
        if (err2 > bound) {
          std::ostringstream detail;
          detail << "violation: err2=" << err2 << " bound=" << bound
                 << " t=" << t << " geometry=" << (geometry ? "nuclear" : "l1");
          return {false, detail.str()};
        }
      }
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::ostringstream detail;
  detail << checked << " instance/t pairs, zero violations, " << secs << " s";
  if (secs >= 10.0) {
    detail << " (over the 10 s budget)";
    return {false, detail.str()};
  }
  return {true, detail.str()};
}

Outcome criterion_2_prop12() {
  Rng rng(11002);
  const auto set = FeasibleSet::l1_ball(1.0, 10);
  const Point center = random_point(rng, 10, 1.0);
  long checked = 0;
  for (double beta : {0.5, 1.0, 2.0}) {
    for (int i = 0; i < 1000; ++i) {
      const Point theta = random_feasible(rng, set, 1.0);
      const Point z = random_point(rng, 10, 2.0);
      const Point grad(theta.values - center.values);
      ++checked;
      if (!check_prop_12(set, theta, z, grad, beta)) {
        std::ostringstream detail;
        detail << "violation at beta=" << beta << " instance " << i;
        return {false, detail.str()};
      }
    }
  }
  return {true, std::to_string(checked) + " instances, zero violations"};
}

Outcome criterion_3_prop11() {
  Rng rng(11003);
  const auto set = FeasibleSet::l1_ball(1.0, 10);
  const Point center = random_point(rng, 10, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Point theta = random_feasible(rng, set, 1.0);
    const Point grad(theta.values - center.values);
    if (!check_prop_11(set, theta, grad, 1.0)) {
      return {false, "violation at instance " + std::to_string(i)};
    }
  }
  return {true, "1000 instances, zero violations"};
}

Outcome criterion_4_gradients() {
  double worst = 0.0;
  {
    StrategicEnvConfig cfg;
    cfg.agent_count = 50;
    cfg.updates_per_step = 10;
    cfg.feature_dim = 10;
    cfg.modifiable = {1, 2, 3};
    cfg.lambda = 0.01;
    cfg.alpha = 0.005;
    cfg.width = 16;
    StrategicEnv env(cfg);
    env.reset(11004);
    Rng rng(11005);
    Point theta = random_point(rng, env.theta_dim(), 0.5);
    for (int i = 0; i < 50; ++i) {
      const Sample s = env.step(theta);
      theta = random_point(rng, env.theta_dim(), 0.5);
      worst = std::max(
          worst,
          finite_diff_check(
              [&](const Point& th) { return env.loss(th, s); },
              [&](const Point& th) { return env.stoch_grad(th, s); }, theta,
              1e-5));
    }
  }
  {
    SingleIndexConfig cfg;
    cfg.d1 = 10;
    cfg.d2 = 20;
    SingleIndexEnv env(cfg);
    env.reset(11006);
    Rng rng(11007);
    Point theta = random_point(rng, 200, 0.1);
    theta.shape = Shape{10, 20};
    for (int i = 0; i < 50; ++i) {
      const Sample s = env.step(theta);
      theta = random_point(rng, 200, 0.1);
      theta.shape = Shape{10, 20};
      worst = std::max(
          worst,
          finite_diff_check(
              [&](const Point& th) { return env.loss(th, s); },
              [&](const Point& th) { return env.stoch_grad(th, s); }, theta,
              1e-5));
    }
  }
  std::ostringstream detail;
  detail << "max relative error " << worst;
  return {worst < 1e-5, detail.str()};
}

Outcome criterion_5_single_index() {
  const auto proj = run_experiment(config_from_template(
      kSingleIndexRunTemplate, "projection", "acceptance_out/c5_projection"));
  const auto icg = run_experiment(config_from_template(
      kSingleIndexRunTemplate, "icg", "acceptance_out/c5_icg"));

  std::ostringstream detail;
  bool pass = true;
  for (const auto* r : {&proj, &icg}) {
    for (const auto& rep : r->reps) {
      if (rep.aborted) {
        return {false, "a repetition aborted: " + rep.abort_reason};
      }
    }
  }
  const double drop_proj =
      proj.mean_v_hat_first_decile / proj.mean_v_hat_last_decile;
  const double drop_icg =
      icg.mean_v_hat_first_decile / icg.mean_v_hat_last_decile;
  detail << "V_hat first/last decile ratio: projection " << drop_proj
         << ", icg " << drop_icg;
  if (!(drop_proj >= 5.0) || !(drop_icg >= 5.0)) {
    pass = false;
  }
  const double mode_ratio = proj.mean_v_out / icg.mean_v_out;
  detail << "; mode mean V(theta_R,z_R) ratio " << mode_ratio;
  if (!(mode_ratio >= 0.5 && mode_ratio <= 2.0)) {
    pass = false;
  }
  return {pass, detail.str()};
}

Outcome criterion_6_rate() {
  const auto cfg = config_from_template(kSweepTemplate, "projection",
                                        "acceptance_out/c6_sweep");
  const auto report = sweep(cfg, {250, 1000, 4000});
  std::ostringstream detail;
  if (!report.sweep_slope) {
    return {false, "slope unavailable"};
  }
  detail << "mean V(theta_R,z_R):";
  for (const auto& p : report.sweep_points) {
    detail << " N=" << p.N << " -> " << p.mean_v_out << ";";
  }
  detail << " slope " << *report.sweep_slope;
  const bool pass = *report.sweep_slope >= -0.7 && *report.sweep_slope <= -0.15;
  return {pass, detail.str()};
}

Outcome criterion_7_strategic() {
  std::ostringstream detail;
  bool pass = true;
  for (const char* mode : {"projection", "icg"}) {
    const auto report = run_experiment(config_from_template(
        kStrategicTemplate, mode,
        std::string("acceptance_out/c7_") + mode));
    for (const auto& rep : report.reps) {
      if (rep.aborted) {
        return {false, "a repetition aborted: " + rep.abort_reason};
      }
    }
    detail << mode << " loss first/last decile " << report.mean_loss_first_decile
           << " -> " << report.mean_loss_last_decile << "; ";
    if (!(report.mean_loss_last_decile < report.mean_loss_first_decile)) {
      pass = false;
    }
  }
  return {pass, detail.str()};
}

Outcome criterion_8_accounting() {
  IidQuadraticConfig env_cfg{Eigen::VectorXd::Zero(4), 1.0};
  IidQuadraticOracle env(env_cfg);
  const auto set = FeasibleSet::l1_ball(1.0, 4);
  RunConfig rc;
  rc.N = 50;
  rc.mode = SolveMode::ICG;
  rc.schedule = Schedule::state_dependent(0.6, 50);
  rc.theta0 = Point::zeros(4);
  rc.seed = 11008;
  MetricProbe probe;
  probe.compute_v = probe.compute_fw_gap = false;
  probe.final_v = false;
  const RunRecord rec = iasa_run(env, set, rc, probe);
  long expected = 0;
  for (int k = 1; k <= 50; ++k) {
    expected += static_cast<long>(std::ceil(std::pow(50.0 + k, 6.0 / 5.0)));
  }
  std::ostringstream detail;
  detail << "sfo_calls=" << rec.sfo_calls << " lmo_calls=" << rec.lmo_calls
         << " expected lmo=" << expected;
  return {rec.sfo_calls == 50 && rec.lmo_calls == expected, detail.str()};
}

Outcome criterion_9_determinism() {
  const std::string outdir = "acceptance_out/c9";
  const auto cfg = config_from_template(kDeterminismTemplate, "icg", outdir);
  run_experiment(cfg);
  std::map<std::string, std::string> first;
  for (const auto& entry : fs::directory_iterator(outdir)) {
    first[entry.path().filename().string()] = slurp(entry.path());
  }
  run_experiment(cfg);
  for (const auto& entry : fs::directory_iterator(outdir)) {
    const auto name = entry.path().filename().string();
    if (!first.count(name)) {
      return {false, "second run created unexpected file " + name};
    }
    if (first[name] != slurp(entry.path())) {
      return {false, "byte mismatch in " + name};
    }
  }
  std::ostringstream detail;
  detail << first.size() << " artifacts byte-identical across reruns";
  return {true, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  unsetenv("MARKOVSA_OUTPUT_DIR");
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    only.insert(std::atoi(argv[i]));
  }

  struct Entry {
    int id;
    const char* name;
    Outcome (*fn)();
  };
  const std::vector<Entry> entries = {
      {1, "ICG accuracy bound", criterion_1_icg_accuracy},
      {2, "gradient-mapping vs V inequality", criterion_2_prop12},
      {3, "gradient-mapping vs FW-gap inequality", criterion_3_prop11},
      {4, "analytic gradients vs finite differences", criterion_4_gradients},
      {5, "single-index experiment at full scale", criterion_5_single_index},
      {6, "convergence-rate sweep", criterion_6_rate},
      {7, "strategic classification loss decrease", criterion_7_strategic},
      {8, "oracle-call accounting", criterion_8_accounting},
      {9, "byte-identical reruns", criterion_9_determinism},
  };

  int failures = 0;
  for (const auto& e : entries) {
    if (!only.empty() && !only.count(e.id)) {
      continue;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = e.fn();
    } catch (const std::exception& ex) {
      out = {false, std::string("exception: ") + ex.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("[%s] criterion %d: %s (%s) [%.1f s]\n",
                out.pass ? "PASS" : "FAIL", e.id, e.name, out.detail.c_str(),
                secs);
    std::fflush(stdout);
    failures += out.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
