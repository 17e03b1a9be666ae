#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "markovsa/harness.hpp"

using namespace markovsa;
namespace fs = std::filesystem;

namespace {

nlohmann::json tiny_config(const std::string& outdir) {
  return nlohmann::json{
      {"environment",
       {{"type", "ar_chain"}, {"dim", 3}, {"rho", 0.5}, {"noise_mean", 0.2}}},
      {"feasible_set", {{"type", "l1_ball"}, {"radius", 1.0}}},
      {"run",
       {{"N", 40},
        {"mode", "icg"},
        {"schedule", {{"kind", "state_dependent"}, {"a", 0.6}}}}},
      {"probe", {{"cadence", 10}, {"burn_in", 5}, {"n", 10},
                 {"final_burn_in", 5}, {"final_n", 10}}},
      {"repetitions", 2},
      {"master_seed", 777},
      {"output_dir", outdir},
  };
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path temp_dir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / ("markovsa_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing is strict") {
  auto doc = tiny_config("out");
  CHECK_NOTHROW(parse_experiment_config(doc));

  auto bad_top = doc;
  bad_top["reps"] = 3;  // typo for repetitions
  CHECK_THROWS_WITH_AS(parse_experiment_config(bad_top),
                       doctest::Contains("unknown key 'reps'"),
                       std::invalid_argument);

  auto bad_env = doc;
  bad_env["environment"]["rho_typo"] = 0.1;
  CHECK_THROWS_AS(parse_experiment_config(bad_env), std::invalid_argument);

  auto missing = doc;
  missing["run"].erase("N");
  CHECK_THROWS_AS(parse_experiment_config(missing), std::invalid_argument);

  auto bad_mode = doc;
  bad_mode["run"]["mode"] = "gradient";
  CHECK_THROWS_AS(parse_experiment_config(bad_mode), std::invalid_argument);
}

TEST_CASE("agents csv ingestion") {
  const auto dir = temp_dir("agents");
  const auto path = dir / "agents.csv";

  SUBCASE("well-formed file round-trips exactly") {
    AgentTable table;
    table.features = RowMatrixXd(3, 2);
    table.features << 0.25, -1.75, 3.5e-3, 2.0, -0.125, 0.875;
    table.labels = (Eigen::VectorXd(3) << 1.0, -1.0, 1.0).finished();
    export_agents(table, path.string());
    const AgentTable back = ingest_agents(path.string());
    CHECK(back.features == table.features);
    CHECK(back.labels == table.labels);
  }
  SUBCASE("label outside {-1,+1} names the row") {
    std::ofstream out(path);
    out << "label,f1,f2\n1,0.5,0.25\n0,0.1,0.2\n";
    out.close();
    CHECK_THROWS_WITH_AS(ingest_agents(path.string()),
                         doctest::Contains("line 3"), std::runtime_error);
  }
  SUBCASE("non-numeric feature names the row") {
    std::ofstream out(path);
    out << "label,f1\n1,0.5\n-1,abc\n";
    out.close();
    CHECK_THROWS_WITH_AS(ingest_agents(path.string()),
                         doctest::Contains("line 3"), std::runtime_error);
  }
  SUBCASE("bad header is rejected") {
    std::ofstream out(path);
    out << "label,x1\n1,0.5\n";
    out.close();
    CHECK_THROWS_AS(ingest_agents(path.string()), std::runtime_error);
  }
  SUBCASE("missing fields are rejected with the line number") {
    std::ofstream out(path);
    out << "label,f1,f2\n1,0.5\n";
    out.close();
    CHECK_THROWS_WITH_AS(ingest_agents(path.string()),
                         doctest::Contains("line 2"), std::runtime_error);
  }
}

TEST_CASE("fit_loglog_slope") {
  CHECK(fit_loglog_slope({{10.0, 1.0}, {100.0, 0.1}}) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  std::vector<std::pair<double, double>> pl;
  for (double n : {10.0, 100.0, 1000.0}) {
    pl.emplace_back(n, 3.0 * std::pow(n, -0.4));
  }
  CHECK(fit_loglog_slope(pl) == doctest::Approx(-0.4).epsilon(1e-12));
  CHECK_THROWS_AS(fit_loglog_slope({{10.0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_loglog_slope({{10.0, -1.0}, {100.0, 1.0}}),
                  std::invalid_argument);
}

TEST_CASE("run_experiment writes deterministic artifacts") {
  const auto dir1 = temp_dir("exp1");
  const auto dir2 = temp_dir("exp2");
  auto cfg1 = parse_experiment_config(tiny_config(dir1.string()));
  auto cfg2 = parse_experiment_config(tiny_config(dir2.string()));

  const auto rep1 = run_experiment(cfg1);
  const auto rep2 = run_experiment(cfg2);

  CHECK(fs::exists(dir1 / "rep_000.csv"));
  CHECK(fs::exists(dir1 / "rep_001.csv"));
  CHECK(fs::exists(dir1 / "aggregate.csv"));
  CHECK(fs::exists(dir1 / "summary.json"));

  SUBCASE("per-iteration files carry the pinned header") {
    const std::string csv = slurp(dir1 / "rep_000.csv");
    CHECK(csv.rfind("k,eta,t_k,loss,V_hat,fw_gap,sfo_calls,lmo_calls\n", 0) ==
          0);
  }
  SUBCASE("byte-identical across reruns of the same config") {
    for (const char* name :
         {"rep_000.csv", "rep_001.csv", "aggregate.csv"}) {
      CHECK(slurp(dir1 / name) == slurp(dir2 / name));
    }
    // summaries echo the config, which differs only in output_dir
    auto j1 = nlohmann::json::parse(slurp(dir1 / "summary.json"));
    auto j2 = nlohmann::json::parse(slurp(dir2 / "summary.json"));
    j1["config"].erase("output_dir");
    j2["config"].erase("output_dir");
    CHECK(j1 == j2);
  }
  SUBCASE("aggregate equals the mean of the repetition curves") {
    const auto records = [&] {
      std::vector<RunRecord> recs;
      const auto set = cfg1.make_set();
      for (int r = 0; r < cfg1.repetitions; ++r) {
        auto oracle = cfg1.make_oracle();
        recs.push_back(iasa_run(*oracle, set,
                                cfg1.make_run_config(
                                    cfg1.N, rep_seed(cfg1.master_seed, r), set),
                                cfg1.probe));
      }
      return recs;
    }();
    const auto curves = aggregate_mean_curves(records);
    for (std::size_t i = 0; i < curves[2].size(); ++i) {
      const double mean_loss =
          0.5 * (records[0].loss[i] + records[1].loss[i]);
      CHECK(std::abs(curves[2][i] - mean_loss) <= 1e-12);
    }
    CHECK(rep1.mean_final_loss ==
          doctest::Approx(0.5 * (records[0].loss.back() +
                                 records[1].loss.back()))
              .epsilon(1e-12));
  }
  SUBCASE("a single repetition aggregates to itself") {
    const auto dir3 = temp_dir("exp3");
    auto doc = tiny_config(dir3.string());
    doc["repetitions"] = 1;
    const auto rep3 = run_experiment(parse_experiment_config(doc));
    const std::string rep_csv = slurp(dir3 / "rep_000.csv");
    const std::string agg_csv = slurp(dir3 / "aggregate.csv");
    // identical numbers; only formatting via the same writer
    auto strip_tk = [](const std::string& s) { return s; };
    CHECK(strip_tk(rep_csv) == strip_tk(agg_csv));
  }
  (void)rep2;
}

TEST_CASE("environment variable overrides the output directory") {
  const auto dir = temp_dir("exp_env");
  const auto override_dir = temp_dir("exp_env_override");
  auto cfg = parse_experiment_config(tiny_config(dir.string()));
  setenv("MARKOVSA_OUTPUT_DIR", override_dir.string().c_str(), 1);
  run_experiment(cfg);
  unsetenv("MARKOVSA_OUTPUT_DIR");
  CHECK(fs::exists(override_dir / "summary.json"));
  CHECK_FALSE(fs::exists(dir / "summary.json"));
}

TEST_CASE("sweep") {
  const auto dir = temp_dir("sweep");
  auto doc = tiny_config(dir.string());
  doc["probe"]["metrics"] = {"loss"};
  auto cfg = parse_experiment_config(doc);

  SUBCASE("a one-point grid has no slope") {
    const auto report = sweep(cfg, {20});
    CHECK_FALSE(report.sweep_slope.has_value());
    const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(j["sweep"]["slope"].is_null());
  }
  SUBCASE("grids must increase") {
    CHECK_THROWS_AS(sweep(cfg, {100, 50}), std::invalid_argument);
    CHECK_THROWS_AS(sweep(cfg, {}), std::invalid_argument);
  }
  SUBCASE("multi-point sweeps fit a slope and write per-N artifacts") {
    const auto report = sweep(cfg, {20, 40});
    CHECK(report.sweep_points.size() == 2);
    CHECK(fs::exists(dir / "N_20" / "aggregate.csv"));
    CHECK(fs::exists(dir / "N_40" / "summary.json"));
    CHECK(report.sweep_slope.has_value());
  }
}

TEST_CASE("a corrupted lmo is caught with a counterexample") {
  const auto flipped = [](const FeasibleSet& set, const Point& q) {
    Point v = lmo(set, q);
    v.values = -v.values;  // maximizes instead of minimizes
    return v;
  };
  const auto item = check_lmo_optimality(2024, flipped);
  CHECK_FALSE(item.pass);
  CHECK(item.detail.find("counterexample") != std::string::npos);

  const auto honest = check_lmo_optimality(
      2024, [](const FeasibleSet& s, const Point& q) { return lmo(s, q); });
  CHECK(honest.pass);
}

TEST_CASE("strategic config can start from an ingested population") {
  const auto dir = temp_dir("ingest_env");
  AgentTable table;
  table.features = RowMatrixXd::Zero(6, 4);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 4; ++j) {
      table.features(i, j) = 0.1 * (i + 1) + 0.01 * j;
    }
  }
  table.labels = (Eigen::VectorXd(6) << 1, -1, 1, -1, 1, -1).finished();
  const auto csv = dir / "agents.csv";
  export_agents(table, csv.string());

  nlohmann::json doc = tiny_config(dir.string());
  doc["environment"] = {
      {"type", "strategic"}, {"agents", 6},      {"updates_per_step", 2},
      {"feature_dim", 4},    {"modifiable", {1, 2}}, {"lambda", 0.01},
      {"alpha", 0.0},        {"width", 2},       {"agents_csv", csv.string()},
  };
  doc["feasible_set"] = {{"type", "l1_ball"}, {"radius", 10.0}};
  doc["probe"] = {{"cadence", 50}, {"burn_in", 2}, {"n", 2},
                  {"metrics", {"loss"}}, {"final_v", false}};
  const auto cfg = parse_experiment_config(doc);
  auto oracle = cfg.make_oracle();
  oracle->reset(1);
  auto* env = dynamic_cast<StrategicEnv*>(oracle.get());
  REQUIRE(env != nullptr);
  CHECK(env->features() == table.features);
  CHECK(env->labels() == table.labels);
}
