#include "markovsa/streams.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace markovsa {

Point estimate_mean_gradient(const StreamOracle& oracle, const Point& theta,
                             int burn_in, int n, std::uint64_t seed) {
  if (burn_in < 1 || n < 1) {
    throw std::invalid_argument(
        "estimate_mean_gradient: burn_in and n must be at least 1");
  }
  auto probe = oracle.clone();
  probe->reseed(seed);
  for (int i = 0; i < burn_in; ++i) {
    probe->step(theta);
  }
  Point acc;
  for (int i = 0; i < n; ++i) {
    const Sample s = probe->step(theta);
    const Point g = probe->stoch_grad(theta, s);
    if (i == 0) {
      acc = g;
    } else {
      acc.values += g.values;
    }
  }
  if (!acc.is_finite()) {
    throw std::runtime_error("estimate_mean_gradient: chain diverged");
  }
  acc.values /= static_cast<double>(n);
  return acc;
}

// ---------------------------------------------------------------------------
// iid quadratic

IidQuadraticOracle::IidQuadraticOracle(IidQuadraticConfig config)
    : config_(std::move(config)) {
  if (config_.center.size() < 1 || config_.noise_scale < 0.0) {
    throw std::invalid_argument("IidQuadraticOracle: invalid config");
  }
}

void IidQuadraticOracle::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  steps_ = 0;
}

void IidQuadraticOracle::reseed(std::uint64_t seed) { rng_ = Rng(seed); }

Sample IidQuadraticOracle::step(const Point& theta) {
  if (theta.size() != theta_dim()) {
    throw std::invalid_argument("IidQuadraticOracle: theta dimension");
  }
  Sample s;
  s.x = Point(config_.center);
  if (config_.noise_scale > 0.0) {
    for (Eigen::Index j = 0; j < s.x.size(); ++j) {
      s.x.values[j] += config_.noise_scale * rng_.normal();
    }
  }
  ++steps_;
  return s;
}

Point IidQuadraticOracle::stoch_grad(const Point& theta,
                                     const Sample& s) const {
  return Point(theta.values - s.x.values);
}

double IidQuadraticOracle::loss(const Point& theta, const Sample& s) const {
  return 0.5 * (theta.values - s.x.values).squaredNorm();
}

std::unique_ptr<StreamOracle> IidQuadraticOracle::clone() const {
  return std::make_unique<IidQuadraticOracle>(*this);
}

// ---------------------------------------------------------------------------
// AR(1) chain

ArChainOracle::ArChainOracle(ArChainConfig config) : config_(config) {
  if (config_.dim < 1 || config_.noise_scale < 0.0) {
    throw std::invalid_argument("ArChainOracle: invalid config");
  }
}

void ArChainOracle::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  x_ = Eigen::VectorXd::Zero(config_.dim);
  for (Eigen::Index j = 0; j < config_.dim; ++j) {
    x_[j] = config_.noise_scale * rng_.normal();
  }
  steps_ = 0;
}

void ArChainOracle::reseed(std::uint64_t seed) { rng_ = Rng(seed); }

Sample ArChainOracle::step(const Point& theta) {
  if (theta.size() != config_.dim) {
    throw std::invalid_argument("ArChainOracle: theta dimension");
  }
  for (Eigen::Index j = 0; j < config_.dim; ++j) {
    x_[j] = config_.rho * x_[j] + config_.noise_mean +
            config_.noise_scale * rng_.normal();
  }
  ++steps_;
  Sample s;
  s.x = Point(x_);
  return s;
}

Point ArChainOracle::stoch_grad(const Point& theta, const Sample& s) const {
  return Point(theta.values - s.x.values);
}

double ArChainOracle::loss(const Point& theta, const Sample& s) const {
  return 0.5 * (theta.values - s.x.values).squaredNorm();
}

std::unique_ptr<StreamOracle> ArChainOracle::clone() const {
  return std::make_unique<ArChainOracle>(*this);
}

// ---------------------------------------------------------------------------
// two-layer net

namespace {

inline double sigmoid(double t) {
  if (t >= 0.0) {
    return 1.0 / (1.0 + std::exp(-t));
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

inline double activate(Activation a, double t) {
  return a == Activation::Sigmoid ? sigmoid(t) : t;
}

inline double activate_deriv(Activation a, double t) {
  if (a == Activation::Identity) {
    return 1.0;
  }
  const double s = sigmoid(t);
  return s * (1.0 - s);
}

}  // namespace

double TwoLayerNet::forward(const Eigen::VectorXd& theta,
                            const Eigen::VectorXd& u) const {
  if (theta.size() != param_dim() || u.size() != in_dim) {
    throw std::invalid_argument("TwoLayerNet: dimension mismatch");
  }
  const auto W = Eigen::Map<const RowMatrixXd>(theta.data(), width, in_dim);
  const auto A = theta.segment(width * in_dim, width);
  const auto B = theta.segment(width * in_dim + width, width);
  double h = 0.0;
  for (int i = 0; i < width; ++i) {
    h += A[i] * activate(activation, W.row(i).dot(u) + B[i]);
  }
  return h;
}

void TwoLayerNet::add_param_grad(const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& u, double scale,
                                 Eigen::VectorXd& out) const {
  const auto W = Eigen::Map<const RowMatrixXd>(theta.data(), width, in_dim);
  const auto A = theta.segment(width * in_dim, width);
  auto gW = Eigen::Map<RowMatrixXd>(out.data(), width, in_dim);
  auto gA = out.segment(width * in_dim, width);
  auto gB = out.segment(width * in_dim + width, width);
  for (int i = 0; i < width; ++i) {
    const double pre = W.row(i).dot(u) + theta[width * in_dim + width + i];
    const double act = activate(activation, pre);
    const double deriv = activate_deriv(activation, pre);
    gA[i] += scale * act;
    gB[i] += scale * A[i] * deriv;
    gW.row(i) += (scale * A[i] * deriv) * u.transpose();
  }
}

Eigen::VectorXd TwoLayerNet::input_grad(const Eigen::VectorXd& theta,
                                        const Eigen::VectorXd& u) const {
  const auto W = Eigen::Map<const RowMatrixXd>(theta.data(), width, in_dim);
  const auto A = theta.segment(width * in_dim, width);
  const auto B = theta.segment(width * in_dim + width, width);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(in_dim);
  for (int i = 0; i < width; ++i) {
    const double deriv = activate_deriv(activation, W.row(i).dot(u) + B[i]);
    g += (A[i] * deriv) * W.row(i).transpose();
  }
  return g;
}

double logistic_loss(double h, double y) {
  // log(1 + exp(-h)) computed overflow-safe
  const double softplus =
      std::max(-h, 0.0) + std::log1p(std::exp(-std::abs(h)));
  return softplus + (1.0 - y) * h / 2.0;
}

double logistic_loss_dh(double h, double y) {
  return -sigmoid(-h) + (1.0 - y) / 2.0;
}

// ---------------------------------------------------------------------------
// strategic classification

void StrategicEnvConfig::validate() const {
  if (agent_count < 1 || feature_dim < 1 || width < 1) {
    throw std::invalid_argument("StrategicEnvConfig: invalid sizes");
  }
  if (updates_per_step < 1 || updates_per_step > agent_count) {
    throw std::invalid_argument(
        "StrategicEnvConfig: requires 1 <= n1 <= agent_count");
  }
  if (!(lambda > 0.0) || !(alpha >= 0.0) || label_noise < 0.0) {
    throw std::invalid_argument("StrategicEnvConfig: invalid parameters");
  }
  if (modifiable.empty()) {
    throw std::invalid_argument("StrategicEnvConfig: empty modifiable set");
  }
  for (int idx : modifiable) {
    if (idx < 1 || idx > feature_dim) {
      throw std::invalid_argument(
          "StrategicEnvConfig: modifiable index out of range");
    }
  }
  if (preset_features.has_value() != preset_labels.has_value()) {
    throw std::invalid_argument(
        "StrategicEnvConfig: preset features and labels must come together");
  }
  if (preset_features) {
    if (preset_features->rows() != agent_count ||
        preset_features->cols() != feature_dim ||
        preset_labels->size() != agent_count) {
      throw std::invalid_argument(
          "StrategicEnvConfig: preset population shape mismatch");
    }
    for (Eigen::Index i = 0; i < preset_labels->size(); ++i) {
      const double y = (*preset_labels)[i];
      if (y != 1.0 && y != -1.0) {
        throw std::invalid_argument(
            "StrategicEnvConfig: preset labels must be +-1");
      }
    }
  }
}

StrategicEnv::StrategicEnv(StrategicEnvConfig config)
    : config_(std::move(config)) {
  config_.validate();
  net_.width = config_.width;
  net_.in_dim = config_.feature_dim;
  net_.activation = config_.activation;
  mod_idx_.reserve(config_.modifiable.size());
  for (int idx : config_.modifiable) {
    mod_idx_.push_back(idx - 1);
  }
  std::sort(mod_idx_.begin(), mod_idx_.end());
  mod_idx_.erase(std::unique(mod_idx_.begin(), mod_idx_.end()),
                 mod_idx_.end());
}

void StrategicEnv::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  const int M = config_.agent_count;
  const int d = config_.feature_dim;

  if (config_.preset_features) {
    features_ = *config_.preset_features;
    labels_ = *config_.preset_labels;
  } else {
    features_.resize(M, d);
    for (int i = 0; i < M; ++i) {
      for (int j = 0; j < d; ++j) {
        features_(i, j) = rng_.normal();
      }
    }
    // labels from a random linear scorer plus noise, balanced by a median
    // split so each class has floor/ceil(M/2) members
    Eigen::VectorXd scorer(d);
    for (int j = 0; j < d; ++j) {
      scorer[j] = rng_.normal();
    }
    Eigen::VectorXd score = features_ * scorer;
    for (int i = 0; i < M; ++i) {
      score[i] += config_.label_noise * rng_.normal();
    }
    std::vector<int> order(M);
    for (int i = 0; i < M; ++i) {
      order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return score[a] < score[b] || (score[a] == score[b] && a < b);
    });
    labels_ = Eigen::VectorXd::Constant(M, -1.0);
    for (int r = M / 2; r < M; ++r) {
      labels_[order[r]] = 1.0;
    }
  }

  original_mod_.resize(M, static_cast<Eigen::Index>(mod_idx_.size()));
  for (int i = 0; i < M; ++i) {
    for (std::size_t c = 0; c < mod_idx_.size(); ++c) {
      original_mod_(i, static_cast<Eigen::Index>(c)) =
          features_(i, mod_idx_[c]);
    }
  }
  scratch_.resize(M);
  steps_ = 0;
}

void StrategicEnv::reseed(std::uint64_t seed) { rng_ = Rng(seed); }

Sample StrategicEnv::step(const Point& theta) {
  if (theta.size() != theta_dim()) {
    throw std::invalid_argument("StrategicEnv: theta dimension");
  }
  if (features_.size() == 0) {
    throw std::logic_error("StrategicEnv: reset() before step()");
  }
  const int M = config_.agent_count;
  const int n1 = config_.updates_per_step;

  // n1 distinct agents, uniform without replacement (partial Fisher-Yates)
  for (int i = 0; i < M; ++i) {
    scratch_[i] = i;
  }
  for (int i = 0; i < n1; ++i) {
    const auto j = i + rng_.uniform_int(M - i);
    std::swap(scratch_[i], scratch_[j]);
  }

  for (int i = 0; i < n1; ++i) {
    const int a = scratch_[i];
    Eigen::VectorXd u = features_.row(a).transpose();
    const Eigen::VectorXd gh = net_.input_grad(theta.values, u);
    for (std::size_t c = 0; c < mod_idx_.size(); ++c) {
      const int col = mod_idx_[c];
      const double cost_grad =
          (u[col] - original_mod_(a, static_cast<Eigen::Index>(c))) /
          config_.lambda;
      features_(a, col) = u[col] + config_.alpha * (gh[col] - cost_grad);
    }
  }
  ++steps_;

  const auto emit = rng_.uniform_int(M);
  if (!features_.row(emit).allFinite()) {
    throw std::runtime_error("StrategicEnv: population diverged");
  }
  Sample s;
  s.x = Point(features_.row(emit).transpose());
  s.y = labels_[emit];
  s.has_y = true;
  return s;
}

Point StrategicEnv::stoch_grad(const Point& theta, const Sample& s) const {
  if (theta.size() != theta_dim() || s.x.size() != config_.feature_dim) {
    throw std::invalid_argument("StrategicEnv: dimension mismatch");
  }
  const double h = net_.forward(theta.values, s.x.values);
  const double dh = logistic_loss_dh(h, s.y);
  Point g = Point::zeros(theta_dim());
  net_.add_param_grad(theta.values, s.x.values, dh, g.values);
  return g;
}

double StrategicEnv::loss(const Point& theta, const Sample& s) const {
  const double h = net_.forward(theta.values, s.x.values);
  return logistic_loss(h, s.y);
}

std::unique_ptr<StreamOracle> StrategicEnv::clone() const {
  return std::make_unique<StrategicEnv>(*this);
}

// ---------------------------------------------------------------------------
// single-index model

void SingleIndexConfig::validate() const {
  if (d1 < 1 || d2 < 1 || rank < 1) {
    throw std::invalid_argument("SingleIndexConfig: invalid sizes");
  }
  if (spectral_radius < 0.0 || spectral_radius >= 1.0) {
    throw std::invalid_argument(
        "SingleIndexConfig: spectral radius must lie in [0, 1)");
  }
  if (state_noise < 0.0 || response_noise < 0.0) {
    throw std::invalid_argument("SingleIndexConfig: negative noise scale");
  }
}

double single_index_link(double s) { return 3.0 * s + 5.0 * std::sin(s); }

double single_index_link_deriv(double s) { return 3.0 + 5.0 * std::cos(s); }

SingleIndexEnv::SingleIndexEnv(SingleIndexConfig config) : config_(config) {
  config_.validate();
}

void SingleIndexEnv::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  const Eigen::Index d1 = config_.d1, d2 = config_.d2;

  Eigen::MatrixXd G(d1, d1);
  for (Eigen::Index i = 0; i < d1; ++i) {
    for (Eigen::Index j = 0; j < d1; ++j) {
      G(i, j) = rng_.normal();
    }
  }
  const double sr = G.eigenvalues().cwiseAbs().maxCoeff();
  A_ = sr > 0.0 ? Eigen::MatrixXd(G * (config_.spectral_radius / sr))
                : Eigen::MatrixXd::Zero(d1, d1);

  const int r = std::min<int>(config_.rank, static_cast<int>(std::min(d1, d2)));
  Eigen::MatrixXd P(d1, r), Q(r, d2);
  for (Eigen::Index i = 0; i < d1; ++i) {
    for (int j = 0; j < r; ++j) {
      P(i, j) = rng_.normal();
    }
  }
  for (int i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < d2; ++j) {
      Q(i, j) = rng_.normal();
    }
  }
  RowMatrixXd raw = P * Q;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(raw);
  const double nuclear = svd.singularValues().sum();
  if (!(nuclear > 0.0)) {
    throw std::runtime_error("SingleIndexEnv: degenerate theta* draw");
  }
  theta_star_ = raw / nuclear;

  x_.resize(d1, d2);
  for (Eigen::Index i = 0; i < d1; ++i) {
    for (Eigen::Index j = 0; j < d2; ++j) {
      x_(i, j) = rng_.normal();
    }
  }
  steps_ = 0;
}

void SingleIndexEnv::reseed(std::uint64_t seed) { rng_ = Rng(seed); }

Sample SingleIndexEnv::step(const Point& theta) {
  if (theta.size() != theta_dim()) {
    throw std::invalid_argument("SingleIndexEnv: theta dimension");
  }
  if (x_.size() == 0) {
    throw std::logic_error("SingleIndexEnv: reset() before step()");
  }
  const Eigen::Index d1 = config_.d1, d2 = config_.d2;

  // draw order is fixed: Bernoulli kick, state noise (row-major), response
  const double kick = rng_.uniform() < 0.5 ? 1.0 : 0.0;
  RowMatrixXd next = A_ * x_;
  for (Eigen::Index i = 0; i < d1; ++i) {
    for (Eigen::Index j = 0; j < d2; ++j) {
      next(i, j) += config_.state_noise * rng_.normal();
    }
  }
  if (kick != 0.0) {
    next += config_.coupling * theta.matrix(d1, d2);
  }
  x_ = next;
  if (!x_.allFinite()) {
    throw std::runtime_error("SingleIndexEnv: state diverged");
  }
  ++steps_;

  const double s_star = (x_.array() * theta_star_.array()).sum();
  Sample s;
  s.x = Point::from_matrix(x_);
  s.y = single_index_link(s_star) + config_.response_noise * rng_.normal();
  s.has_y = true;
  return s;
}

Point SingleIndexEnv::stoch_grad(const Point& theta, const Sample& s) const {
  if (theta.size() != theta_dim() || s.x.size() != theta_dim()) {
    throw std::invalid_argument("SingleIndexEnv: dimension mismatch");
  }
  const double ip = s.x.values.dot(theta.values);  // Frobenius inner product
  const double resid = s.y - single_index_link(ip);
  Point g(Eigen::VectorXd(-2.0 * resid * single_index_link_deriv(ip) *
                          s.x.values));
  g.shape = Shape{config_.d1, config_.d2};
  return g;
}

double SingleIndexEnv::loss(const Point& theta, const Sample& s) const {
  const double ip = s.x.values.dot(theta.values);
  const double resid = s.y - single_index_link(ip);
  return resid * resid;
}

std::unique_ptr<StreamOracle> SingleIndexEnv::clone() const {
  return std::make_unique<SingleIndexEnv>(*this);
}

}  // namespace markovsa
