#include "markovsa/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace markovsa {

namespace {
constexpr double kRelSlack = 1e-9;
}

void MetricProbe::validate() const {
  if (cadence < 0 || burn_in < 1 || n < 1 || final_burn_in < 0 ||
      final_n < 0 || theta_snapshot_cadence < 0) {
    throw std::invalid_argument("MetricProbe: invalid field");
  }
}

Point gradient_mapping(const FeasibleSet& set, const Point& theta,
                       const Point& g, double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("gradient_mapping: beta must be positive");
  }
  set.check_dim(theta);
  set.check_dim(g);
  Point shifted(theta.values - g.values / beta);
  shifted.shape = theta.shape;
  const Point proj = project(set, shifted);
  Point out(beta * (theta.values - proj.values));
  out.shape = theta.shape;
  return out;
}

double fw_gap(const FeasibleSet& set, const Point& theta, const Point& g) {
  set.check_dim(theta);
  set.check_dim(g);
  const Point v = lmo(set, g);
  return g.values.dot(theta.values - v.values);
}

double suboptimality_v(const FeasibleSet& set, const Point& theta,
                       const Point& z, const Point& grad_f, double beta) {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("suboptimality_v: beta must be positive");
  }
  set.check_dim(theta);
  set.check_dim(z);
  set.check_dim(grad_f);
  Point shifted(theta.values - z.values / beta);
  shifted.shape = theta.shape;
  const Point proj = project(set, shifted);
  return (proj.values - theta.values).squaredNorm() +
         (z.values - grad_f.values).squaredNorm();
}

double merit_w(double f_value, double f_star, double phi, const Point& grad_f,
               const Point& z, double alpha1) {
  if (alpha1 < 0.0) {
    throw std::invalid_argument("merit_w: alpha1 must be nonnegative");
  }
  return (f_value - f_star) - phi +
         alpha1 * (grad_f.values - z.values).squaredNorm();
}

bool check_prop_12(const FeasibleSet& set, const Point& theta, const Point& z,
                   const Point& grad_f, double beta) {
  const double lhs = gradient_mapping(set, theta, z, beta).values.squaredNorm();
  const double rhs = std::max(2.0, 2.0 * beta * beta) *
                     suboptimality_v(set, theta, z, grad_f, beta);
  return lhs <= rhs + kRelSlack * std::max(1.0, rhs);
}

bool check_prop_11(const FeasibleSet& set, const Point& theta,
                   const Point& grad_f, double beta) {
  const double lhs =
      gradient_mapping(set, theta, grad_f, beta).values.squaredNorm();
  const double rhs = fw_gap(set, theta, grad_f);
  return lhs <= rhs + kRelSlack * std::max(1.0, std::abs(rhs));
}

double finite_diff_check(const std::function<double(const Point&)>& loss,
                         const std::function<Point(const Point&)>& grad,
                         const Point& theta, double h) {
  if (!(h > 0.0)) {
    throw std::invalid_argument("finite_diff_check: h must be positive");
  }
  const Point g = grad(theta);
  Point probe = theta;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < theta.size(); ++j) {
    const double step = h * (1.0 + std::abs(theta.values[j]));
    const double orig = theta.values[j];
    probe.values[j] = orig + step;
    const double fp = loss(probe);
    probe.values[j] = orig - step;
    const double fm = loss(probe);
    probe.values[j] = orig;
    const double fd = (fp - fm) / (2.0 * step);
    const double rel =
        std::abs(g.values[j] - fd) / std::max(1.0, std::abs(g.values[j]));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace markovsa
