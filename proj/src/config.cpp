#include <fstream>
#include <set>
#include <stdexcept>

#include "markovsa/harness.hpp"
#include "markovsa/rng.hpp"

namespace markovsa {

namespace {

using nlohmann::json;

constexpr std::uint64_t kSaltTheta0 = 0x746865746130ULL;

// Wrapper enforcing that every key of an object is consumed; typos in
// experiment definitions fail loudly instead of silently using defaults.
class StrictObject {
 public:
  StrictObject(const json& j, std::string where)
      : j_(j), where_(std::move(where)) {
    if (!j.is_object()) {
      throw std::invalid_argument("config: " + where_ + " must be an object");
    }
  }

  ~StrictObject() noexcept(false) {
    if (std::uncaught_exceptions() > 0) {
      return;
    }
    for (const auto& [key, value] : j_.items()) {
      (void)value;
      if (!seen_.count(key)) {
        throw std::invalid_argument("config: unknown key '" + key + "' in " +
                                    where_);
      }
    }
  }

  bool has(const std::string& key) {
    if (j_.contains(key)) {
      seen_.insert(key);
      return true;
    }
    return false;
  }

  const json& at(const std::string& key) {
    if (!j_.contains(key)) {
      throw std::invalid_argument("config: missing key '" + key + "' in " +
                                  where_);
    }
    seen_.insert(key);
    return j_.at(key);
  }

  template <typename T>
  T get(const std::string& key) {
    try {
      return at(key).get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config: bad value for '" + key + "' in " +
                                  where_);
    }
  }

  template <typename T>
  T get_or(const std::string& key, T fallback) {
    if (!j_.contains(key)) {
      return fallback;
    }
    return get<T>(key);
  }

  const json& raw() const { return j_; }
  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Eigen::VectorXd vector_from(const json& j, const std::string& where) {
  if (!j.is_array()) {
    throw std::invalid_argument("config: " + where + " must be an array");
  }
  Eigen::VectorXd v(j.size());
  Eigen::Index i = 0;
  for (const auto& x : j) {
    if (!x.is_number()) {
      throw std::invalid_argument("config: " + where +
                                  " must contain numbers");
    }
    v[i++] = x.get<double>();
  }
  return v;
}

void parse_environment(StrictObject& env, ExperimentConfig& cfg) {
  const std::string type = env.get<std::string>("type");
  if (type == "iid_quadratic") {
    cfg.env_kind = EnvKind::IidQuadratic;
    const auto dim = env.get<Eigen::Index>("dim");
    if (env.has("center")) {
      cfg.iid.center = vector_from(env.raw().at("center"), "environment.center");
      if (cfg.iid.center.size() != dim) {
        throw std::invalid_argument("config: environment.center length != dim");
      }
    } else {
      cfg.iid.center = Eigen::VectorXd::Zero(dim);
    }
    cfg.iid.noise_scale = env.get_or<double>("noise_scale", 0.0);
  } else if (type == "ar_chain") {
    cfg.env_kind = EnvKind::ArChain;
    cfg.ar.dim = env.get<Eigen::Index>("dim");
    cfg.ar.rho = env.get<double>("rho");
    cfg.ar.noise_mean = env.get_or<double>("noise_mean", 0.0);
    cfg.ar.noise_scale = env.get_or<double>("noise_scale", 1.0);
  } else if (type == "strategic") {
    cfg.env_kind = EnvKind::Strategic;
    auto& s = cfg.strategic;
    s.agent_count = env.get<int>("agents");
    s.updates_per_step = env.get<int>("updates_per_step");
    s.feature_dim = env.get<int>("feature_dim");
    s.modifiable = env.get<std::vector<int>>("modifiable");
    s.lambda = env.get<double>("lambda");
    s.alpha = env.get<double>("alpha");
    s.width = env.get<int>("width");
    const std::string act = env.get_or<std::string>("activation", "sigmoid");
    if (act == "sigmoid") {
      s.activation = Activation::Sigmoid;
    } else if (act == "identity") {
      s.activation = Activation::Identity;
    } else {
      throw std::invalid_argument("config: unknown activation '" + act + "'");
    }
    s.label_noise = env.get_or<double>("label_noise", 0.1);
    if (env.has("agents_csv")) {
      const auto table =
          ingest_agents(env.at("agents_csv").get<std::string>());
      if (table.features.cols() != s.feature_dim ||
          table.features.rows() != s.agent_count) {
        throw std::invalid_argument(
            "config: agents_csv shape does not match agents/feature_dim");
      }
      s.preset_features = table.features;
      s.preset_labels = table.labels;
    }
    s.validate();
  } else if (type == "single_index") {
    cfg.env_kind = EnvKind::SingleIndex;
    auto& s = cfg.single_index;
    s.d1 = env.get<Eigen::Index>("d1");
    s.d2 = env.get<Eigen::Index>("d2");
    s.coupling = env.get<double>("v");
    s.spectral_radius = env.get_or<double>("spectral_radius", 0.7);
    s.state_noise = env.get_or<double>("state_noise", 1.0);
    s.response_noise = env.get_or<double>("response_noise", 1.0);
    s.rank = env.get_or<int>("rank", 3);
    s.validate();
  } else {
    throw std::invalid_argument("config: unknown environment type '" + type +
                                "'");
  }
}

Eigen::Index env_theta_dim(const ExperimentConfig& cfg) {
  switch (cfg.env_kind) {
    case EnvKind::IidQuadratic:
      return cfg.iid.center.size();
    case EnvKind::ArChain:
      return cfg.ar.dim;
    case EnvKind::Strategic:
      return TwoLayerNet::param_dim(cfg.strategic.width,
                                    cfg.strategic.feature_dim);
    case EnvKind::SingleIndex:
      return cfg.single_index.d1 * cfg.single_index.d2;
  }
  return 0;
}

void parse_feasible_set(StrictObject& fs, ExperimentConfig& cfg) {
  const std::string type = fs.get<std::string>("type");
  const Eigen::Index dim = env_theta_dim(cfg);
  if (type == "l1_ball") {
    cfg.set_kind = SetKind::L1Ball;
    cfg.set_radius = fs.get<double>("radius");
    const auto d = fs.get_or<Eigen::Index>("dim", dim);
    if (d != dim) {
      throw std::invalid_argument(
          "config: feasible_set.dim does not match the environment");
    }
  } else if (type == "nuclear_ball") {
    cfg.set_kind = SetKind::NuclearBall;
    cfg.set_radius = fs.get<double>("radius");
    if (cfg.env_kind != EnvKind::SingleIndex) {
      throw std::invalid_argument(
          "config: nuclear_ball requires a matrix-valued environment");
    }
    const auto rows = fs.get_or<Eigen::Index>("rows", cfg.single_index.d1);
    const auto cols = fs.get_or<Eigen::Index>("cols", cfg.single_index.d2);
    if (rows != cfg.single_index.d1 || cols != cfg.single_index.d2) {
      throw std::invalid_argument(
          "config: nuclear_ball shape does not match the environment");
    }
  } else if (type == "box") {
    cfg.set_kind = SetKind::Box;
    const json& lo = fs.at("lo");
    const json& hi = fs.at("hi");
    if (lo.is_number() && hi.is_number()) {
      cfg.box_lo = Eigen::VectorXd::Constant(dim, lo.get<double>());
      cfg.box_hi = Eigen::VectorXd::Constant(dim, hi.get<double>());
    } else {
      cfg.box_lo = vector_from(lo, "feasible_set.lo");
      cfg.box_hi = vector_from(hi, "feasible_set.hi");
      if (cfg.box_lo.size() != dim || cfg.box_hi.size() != dim) {
        throw std::invalid_argument(
            "config: box bounds do not match the environment dimension");
      }
    }
  } else {
    throw std::invalid_argument("config: unknown feasible_set type '" + type +
                                "'");
  }
}

void parse_run(StrictObject& run, ExperimentConfig& cfg) {
  cfg.N = run.get<int>("N");
  const std::string mode = run.get<std::string>("mode");
  if (mode == "projection") {
    cfg.mode = SolveMode::Projection;
  } else if (mode == "icg") {
    cfg.mode = SolveMode::ICG;
  } else {
    throw std::invalid_argument("config: run.mode must be projection or icg");
  }
  cfg.beta = run.get_or<double>("beta", 1.0);
  cfg.omega = run.get_or<double>("omega", 1.0);

  if (run.has("schedule")) {
    StrictObject sched(run.at("schedule"), "run.schedule");
    const std::string kind = sched.get<std::string>("kind");
    if (kind == "state_dependent") {
      cfg.schedule_kind = ScheduleKind::StateDependent;
      cfg.schedule_a = sched.get_or<double>("a", 0.6);
    } else if (kind == "state_independent") {
      cfg.schedule_kind = ScheduleKind::StateIndependent;
    } else if (kind == "custom") {
      cfg.schedule_kind = ScheduleKind::Custom;
      cfg.custom_etas = sched.get<std::vector<double>>("etas");
      cfg.custom_ts = sched.get_or<std::vector<int>>("ts", {});
    } else {
      throw std::invalid_argument("config: unknown schedule kind '" + kind +
                                  "'");
    }
  }

  if (run.has("theta0")) {
    StrictObject t0(run.at("theta0"), "run.theta0");
    const std::string kind = t0.get<std::string>("kind");
    if (kind == "zeros") {
      cfg.theta0.kind = Theta0Spec::Kind::Zeros;
    } else if (kind == "gaussian") {
      cfg.theta0.kind = Theta0Spec::Kind::Gaussian;
      cfg.theta0.scale = t0.get_or<double>("scale", 0.1);
    } else if (kind == "vertex") {
      cfg.theta0.kind = Theta0Spec::Kind::Vertex;
    } else {
      throw std::invalid_argument("config: unknown theta0 kind '" + kind +
                                  "'");
    }
  }

  if (run.has("z0")) {
    StrictObject z0(run.at("z0"), "run.z0");
    const std::string kind = z0.get<std::string>("kind");
    if (kind == "zeros") {
      cfg.z0_mode = Z0Mode::Zeros;
    } else if (kind == "estimate") {
      cfg.z0_mode = Z0Mode::Estimate;
      cfg.z0_burn_in = z0.get_or<int>("burn_in", 500);
      cfg.z0_n = z0.get_or<int>("n", 2000);
    } else {
      throw std::invalid_argument("config: unknown z0 kind '" + kind + "'");
    }
  }
}

void parse_probe(StrictObject& probe, ExperimentConfig& cfg) {
  auto& p = cfg.probe;
  p.cadence = probe.get_or<int>("cadence", 0);
  p.burn_in = probe.get_or<int>("burn_in", 500);
  p.n = probe.get_or<int>("n", 2000);
  p.final_v = probe.get_or<bool>("final_v", true);
  p.final_burn_in = probe.get_or<int>("final_burn_in", 0);
  p.final_n = probe.get_or<int>("final_n", 0);
  p.theta_snapshot_cadence = probe.get_or<int>("theta_snapshot_cadence", 0);
  if (probe.has("metrics")) {
    p.compute_v = p.compute_fw_gap = p.compute_loss = false;
    for (const auto& m : probe.at("metrics")) {
      const std::string name = m.get<std::string>();
      if (name == "v") {
        p.compute_v = true;
      } else if (name == "fw_gap") {
        p.compute_fw_gap = true;
      } else if (name == "loss") {
        p.compute_loss = true;
      } else {
        throw std::invalid_argument("config: unknown probe metric '" + name +
                                    "'");
      }
    }
  }
  p.validate();
}

}  // namespace

ExperimentConfig parse_experiment_config(const nlohmann::json& doc) {
  ExperimentConfig cfg;
  cfg.echo = doc;

  StrictObject top(doc, "top level");
  cfg.name = top.get_or<std::string>("name", "");

  {
    StrictObject env(top.at("environment"), "environment");
    parse_environment(env, cfg);
  }
  {
    StrictObject fs(top.at("feasible_set"), "feasible_set");
    parse_feasible_set(fs, cfg);
  }
  {
    StrictObject run(top.at("run"), "run");
    parse_run(run, cfg);
  }
  if (top.has("probe")) {
    StrictObject probe(top.raw().at("probe"), "probe");
    parse_probe(probe, cfg);
  }

  cfg.repetitions = top.get_or<int>("repetitions", 1);
  if (cfg.repetitions < 1) {
    throw std::invalid_argument("config: repetitions must be at least 1");
  }
  cfg.master_seed = top.get_or<std::uint64_t>("master_seed", 0);
  cfg.output_dir = top.get_or<std::string>("output_dir", "out");
  cfg.threads = top.get_or<int>("threads", 0);

  // fail fast on inconsistent run parameters
  cfg.make_set();
  cfg.make_schedule(cfg.N);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("config: cannot open '" + path + "'");
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("config: invalid JSON in '" + path +
                             "': " + e.what());
  }
  return parse_experiment_config(doc);
}

std::uint64_t rep_seed(std::uint64_t master_seed, int repetition) {
  return mix_seed(master_seed, static_cast<std::uint64_t>(repetition));
}

std::unique_ptr<StreamOracle> make_oracle_from_json(
    const nlohmann::json& env) {
  ExperimentConfig cfg;
  {
    StrictObject obj(env, "environment");
    parse_environment(obj, cfg);
  }
  return cfg.make_oracle();
}

std::unique_ptr<StreamOracle> ExperimentConfig::make_oracle() const {
  switch (env_kind) {
    case EnvKind::IidQuadratic:
      return std::make_unique<IidQuadraticOracle>(iid);
    case EnvKind::ArChain:
      return std::make_unique<ArChainOracle>(ar);
    case EnvKind::Strategic:
      return std::make_unique<StrategicEnv>(strategic);
    case EnvKind::SingleIndex:
      return std::make_unique<SingleIndexEnv>(single_index);
  }
  throw std::logic_error("make_oracle: unknown environment");
}

FeasibleSet ExperimentConfig::make_set() const {
  const Eigen::Index dim = [&] {
    auto oracle = make_oracle();
    return oracle->theta_dim();
  }();
  switch (set_kind) {
    case SetKind::L1Ball:
      return FeasibleSet::l1_ball(set_radius, dim);
    case SetKind::NuclearBall:
      return FeasibleSet::nuclear_ball(set_radius, single_index.d1,
                                       single_index.d2);
    case SetKind::Box:
      return FeasibleSet::box(box_lo, box_hi);
  }
  throw std::logic_error("make_set: unknown set kind");
}

Schedule ExperimentConfig::make_schedule(int horizon) const {
  switch (schedule_kind) {
    case ScheduleKind::StateDependent:
      return Schedule::state_dependent(schedule_a, horizon);
    case ScheduleKind::StateIndependent:
      return Schedule::state_independent(horizon);
    case ScheduleKind::Custom:
      return Schedule::custom(custom_etas, custom_ts);
  }
  throw std::logic_error("make_schedule: unknown kind");
}

Point ExperimentConfig::make_theta0(const FeasibleSet& set,
                                    std::uint64_t seed) const {
  switch (theta0.kind) {
    case Theta0Spec::Kind::Zeros: {
      Point p = Point::zeros(set.dim());
      if (set.kind() == SetKind::NuclearBall) {
        p.shape = Shape{set.rows(), set.cols()};
      }
      return project(set, p);
    }
    case Theta0Spec::Kind::Gaussian: {
      Rng rng(mix_seed(seed, kSaltTheta0));
      Point p = Point::zeros(set.dim());
      for (Eigen::Index j = 0; j < p.size(); ++j) {
        p.values[j] = theta0.scale * rng.normal();
      }
      if (set.kind() == SetKind::NuclearBall) {
        p.shape = Shape{set.rows(), set.cols()};
      }
      return project(set, p);
    }
    case Theta0Spec::Kind::Vertex: {
      // classic conditional-gradient start: an extreme point picked by the
      // LMO along a seed-derived random direction
      Rng rng(mix_seed(seed, kSaltTheta0));
      Point q = Point::zeros(set.dim());
      for (Eigen::Index j = 0; j < q.size(); ++j) {
        q.values[j] = rng.normal();
      }
      if (set.kind() == SetKind::NuclearBall) {
        q.shape = Shape{set.rows(), set.cols()};
      }
      return lmo(set, q);
    }
  }
  throw std::logic_error("make_theta0: unknown kind");
}

RunConfig ExperimentConfig::make_run_config(int horizon, std::uint64_t seed,
                                            const FeasibleSet& set) const {
  RunConfig rc;
  rc.N = horizon;
  rc.mode = mode;
  rc.beta = beta;
  rc.omega = omega;
  rc.schedule = make_schedule(horizon);
  rc.theta0 = make_theta0(set, seed);
  rc.z0_mode = z0_mode;
  rc.z0_burn_in = z0_burn_in;
  rc.z0_n = z0_n;
  rc.seed = seed;
  return rc;
}

}  // namespace markovsa
