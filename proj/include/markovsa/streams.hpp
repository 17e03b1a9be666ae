#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "markovsa/point.hpp"
#include "markovsa/rng.hpp"

namespace markovsa {

// One emitted observation: a feature point, optionally paired with a
// scalar label / response.
struct Sample {
  Point x;
  double y = 0.0;
  bool has_y = false;
};

// A theta-controlled Markovian data stream. `step` advances the chain one
// transition under the supplied decision variable and emits a sample;
// `stoch_grad` and `loss` evaluate the per-sample objective. Each instance
// owns its random stream exclusively; concurrent use requires distinct
// instances (see clone()).
class StreamOracle {
 public:
  virtual ~StreamOracle() = default;

  // deterministic (re)initialization of the chain state from the seed
  virtual void reset(std::uint64_t seed) = 0;

  // replace the noise stream without touching the chain state or the
  // realized problem instance; used by probe clones
  virtual void reseed(std::uint64_t seed) = 0;

  virtual Sample step(const Point& theta) = 0;
  virtual Point stoch_grad(const Point& theta, const Sample& s) const = 0;
  virtual double loss(const Point& theta, const Sample& s) const = 0;

  virtual Eigen::Index theta_dim() const = 0;
  virtual long step_count() const = 0;

  // deep copy, chain state and problem instance included
  virtual std::unique_ptr<StreamOracle> clone() const = 0;
};

// Freezes theta, advances a reseeded clone of the oracle burn_in steps,
// then averages stoch_grad over the next n samples. Surrogate for the
// stationary-distribution mean gradient; used by metrics probes only,
// never by the solver path.
Point estimate_mean_gradient(const StreamOracle& oracle, const Point& theta,
                             int burn_in, int n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// iid quadratic stream: F(theta, x) = 1/2 ||theta - x||^2 with
// x ~ N(center, noise_scale^2 I); grad F = theta - x, so the mean gradient
// is theta - center exactly.

struct IidQuadraticConfig {
  Eigen::VectorXd center;
  double noise_scale = 0.0;
};

class IidQuadraticOracle final : public StreamOracle {
 public:
  explicit IidQuadraticOracle(IidQuadraticConfig config);

  void reset(std::uint64_t seed) override;
  void reseed(std::uint64_t seed) override;
  Sample step(const Point& theta) override;
  Point stoch_grad(const Point& theta, const Sample& s) const override;
  double loss(const Point& theta, const Sample& s) const override;
  Eigen::Index theta_dim() const override { return config_.center.size(); }
  long step_count() const override { return steps_; }
  std::unique_ptr<StreamOracle> clone() const override;

 private:
  IidQuadraticConfig config_;
  Rng rng_{0};
  long steps_ = 0;
};

// ---------------------------------------------------------------------------
// state-independent AR(1) chain: x_{k+1} = rho x_k + w, w ~ N(mean,
// scale^2 I) per coordinate, with the same quadratic objective as above.
// Stationary mean is mean / (1 - rho).

struct ArChainConfig {
  Eigen::Index dim = 1;
  double rho = 0.5;
  double noise_mean = 0.0;
  double noise_scale = 1.0;
};

class ArChainOracle final : public StreamOracle {
 public:
  explicit ArChainOracle(ArChainConfig config);

  void reset(std::uint64_t seed) override;
  void reseed(std::uint64_t seed) override;
  Sample step(const Point& theta) override;
  Point stoch_grad(const Point& theta, const Sample& s) const override;
  double loss(const Point& theta, const Sample& s) const override;
  Eigen::Index theta_dim() const override { return config_.dim; }
  long step_count() const override { return steps_; }
  std::unique_ptr<StreamOracle> clone() const override;

  const Eigen::VectorXd& state() const { return x_; }

 private:
  ArChainConfig config_;
  Eigen::VectorXd x_;
  Rng rng_{0};
  long steps_ = 0;
};

// ---------------------------------------------------------------------------
// two-layer classifier h(u; theta) = sum_i A_i act(W_i . u + B_i) with
// theta = flatten(W row-major, A, B)

enum class Activation { Sigmoid, Identity };

struct TwoLayerNet {
  int width = 1;
  int in_dim = 1;
  Activation activation = Activation::Sigmoid;

  static Eigen::Index param_dim(int width, int in_dim) {
    return static_cast<Eigen::Index>(width) * in_dim + 2 * width;
  }
  Eigen::Index param_dim() const { return param_dim(width, in_dim); }

  double forward(const Eigen::VectorXd& theta, const Eigen::VectorXd& u) const;

  // accumulates scale * dh/dtheta into out (out must be param_dim long)
  void add_param_grad(const Eigen::VectorXd& theta, const Eigen::VectorXd& u,
                      double scale, Eigen::VectorXd& out) const;

  // dh/du
  Eigen::VectorXd input_grad(const Eigen::VectorXd& theta,
                             const Eigen::VectorXd& u) const;
};

// logistic loss log(1 + exp(-h)) + (1 - y) h / 2 for labels y in {-1, +1}
double logistic_loss(double h, double y);
double logistic_loss_dh(double h, double y);

// ---------------------------------------------------------------------------
// strategic classification stream: a population of M agents; each step a
// random subset of n1 agents gradient-ascends its modifiable features
// against the deployed classifier (quadratic modification cost), then one
// uniformly drawn agent is emitted.

struct StrategicEnvConfig {
  int agent_count = 100;         // M
  int updates_per_step = 10;     // n1
  int feature_dim = 10;          // d
  std::vector<int> modifiable;   // S, 1-based feature indices
  double lambda = 0.01;          // cost sensitivity
  double alpha = 0.005;          // agent stepsize
  int width = 16;                // classifier width m
  Activation activation = Activation::Sigmoid;
  double label_noise = 0.1;      // score noise in the synthetic labeler
  // optional preset population (e.g. ingested from CSV); labels in {-1,+1}
  std::optional<RowMatrixXd> preset_features;
  std::optional<Eigen::VectorXd> preset_labels;

  void validate() const;
};

class StrategicEnv final : public StreamOracle {
 public:
  explicit StrategicEnv(StrategicEnvConfig config);

  void reset(std::uint64_t seed) override;
  void reseed(std::uint64_t seed) override;
  Sample step(const Point& theta) override;
  Point stoch_grad(const Point& theta, const Sample& s) const override;
  double loss(const Point& theta, const Sample& s) const override;
  Eigen::Index theta_dim() const override { return net_.param_dim(); }
  long step_count() const override { return steps_; }
  std::unique_ptr<StreamOracle> clone() const override;

  const RowMatrixXd& features() const { return features_; }
  const Eigen::VectorXd& labels() const { return labels_; }
  const TwoLayerNet& net() const { return net_; }

 private:
  StrategicEnvConfig config_;
  TwoLayerNet net_;
  RowMatrixXd features_;        // M x d, current (strategically shifted)
  RowMatrixXd original_mod_;    // M x |S|, the recorded u^0_S
  Eigen::VectorXd labels_;      // +-1
  std::vector<int> mod_idx_;    // 0-based modifiable columns
  std::vector<int> scratch_;    // selection buffer
  Rng rng_{0};
  long steps_ = 0;
};

// ---------------------------------------------------------------------------
// single-index regression stream with matrix-valued state:
// x_{k+1} = A x_k + E_{k+1} + W_{k+1} v theta, y = g(<x, theta*>) + noise,
// g(s) = 3 s + 5 sin(s). A is drawn Gaussian at reset and rescaled to the
// configured spectral radius; theta* is a random rank-`rank` matrix with
// nuclear norm 1.

struct SingleIndexConfig {
  Eigen::Index d1 = 10;
  Eigen::Index d2 = 20;
  double coupling = 0.1;        // v
  double spectral_radius = 0.7;
  double state_noise = 1.0;     // scale of E_k entries
  double response_noise = 1.0;  // scale of the response noise
  int rank = 3;                 // rank of theta*

  void validate() const;
};

double single_index_link(double s);
double single_index_link_deriv(double s);

class SingleIndexEnv final : public StreamOracle {
 public:
  explicit SingleIndexEnv(SingleIndexConfig config);

  void reset(std::uint64_t seed) override;
  void reseed(std::uint64_t seed) override;
  Sample step(const Point& theta) override;
  Point stoch_grad(const Point& theta, const Sample& s) const override;
  double loss(const Point& theta, const Sample& s) const override;
  Eigen::Index theta_dim() const override { return config_.d1 * config_.d2; }
  long step_count() const override { return steps_; }
  std::unique_ptr<StreamOracle> clone() const override;

  const Eigen::MatrixXd& mixing_matrix() const { return A_; }
  const RowMatrixXd& theta_star() const { return theta_star_; }
  const RowMatrixXd& state() const { return x_; }

 private:
  SingleIndexConfig config_;
  Eigen::MatrixXd A_;
  RowMatrixXd theta_star_;
  RowMatrixXd x_;
  Rng rng_{0};
  long steps_ = 0;
};

}  // namespace markovsa
