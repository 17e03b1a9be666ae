#include "markovsa/geometry.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace markovsa {

namespace {

constexpr int kPowerIterCap = 1000;
constexpr double kPowerIterTol = 1e-10;

void check_finite(const Point& p, const char* what) {
  if (!p.is_finite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite input");
  }
}

}  // namespace

FeasibleSet FeasibleSet::l1_ball(double radius, Eigen::Index dim) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("l1_ball: radius must be positive");
  }
  if (dim < 1) {
    throw std::invalid_argument("l1_ball: dimension must be at least 1");
  }
  FeasibleSet s;
  s.kind_ = SetKind::L1Ball;
  s.radius_ = radius;
  s.dim_ = dim;
  return s;
}

FeasibleSet FeasibleSet::nuclear_ball(double radius, Eigen::Index rows,
                                      Eigen::Index cols) {
  if (!(radius > 0.0)) {
    throw std::invalid_argument("nuclear_ball: radius must be positive");
  }
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument("nuclear_ball: invalid matrix dimensions");
  }
  FeasibleSet s;
  s.kind_ = SetKind::NuclearBall;
  s.radius_ = radius;
  s.rows_ = rows;
  s.cols_ = cols;
  s.dim_ = rows * cols;
  return s;
}

FeasibleSet FeasibleSet::box(Eigen::VectorXd lo, Eigen::VectorXd hi) {
  if (lo.size() != hi.size() || lo.size() < 1) {
    throw std::invalid_argument("box: lo/hi dimension mismatch");
  }
  if (!lo.allFinite() || !hi.allFinite()) {
    throw std::invalid_argument("box: bounds must be finite");
  }
  if (((hi - lo).array() < 0.0).any()) {
    throw std::invalid_argument("box: requires lo <= hi coordinatewise");
  }
  FeasibleSet s;
  s.kind_ = SetKind::Box;
  s.dim_ = lo.size();
  s.lo_ = std::move(lo);
  s.hi_ = std::move(hi);
  return s;
}

double FeasibleSet::diameter() const {
  switch (kind_) {
    case SetKind::L1Ball:
    case SetKind::NuclearBall:
      return 2.0 * radius_;
    case SetKind::Box:
      return (hi_ - lo_).norm();
  }
  return 0.0;
}

void FeasibleSet::check_dim(const Point& p) const {
  if (p.size() != dim_) {
    throw std::invalid_argument("FeasibleSet: point dimension mismatch");
  }
  if (kind_ == SetKind::NuclearBall && p.shape &&
      (p.shape->rows != rows_ || p.shape->cols != cols_)) {
    throw std::invalid_argument("FeasibleSet: point shape mismatch");
  }
}

SingularPair leading_singular_pair(const Eigen::Ref<const RowMatrixXd>& q,
                                   const Eigen::VectorXd* v0,
                                   double sigma_slack) {
  const Eigen::Index n = q.cols();
  SingularPair out;
  out.v = v0 ? *v0 : Eigen::VectorXd::Ones(n);
  const double n0 = out.v.norm();
  if (n0 == 0.0) {
    out.v = Eigen::VectorXd::Ones(n);
  }
  out.v /= out.v.norm();

  Eigen::VectorXd y(q.rows()), w(n);
  double rho_prev = -1.0;
  out.converged = false;
  for (int it = 1; it <= kPowerIterCap; ++it) {
    y.noalias() = q * out.v;
    w.noalias() = q.transpose() * y;  // w = (q^T q) v
    const double rho = y.squaredNorm();  // Rayleigh quotient of q^T q
    out.iterations = it;
    const double wn = w.norm();
    if (wn == 0.0) {
      // q annihilates v (or q == 0); treat as a zero singular value
      out.sigma = 0.0;
      out.converged = true;
      break;
    }
    if (sigma_slack > 0.0 && rho > 0.0) {
      // lambda_1(q^T q) <= rho + ||w - rho v||, hence
      // sigma_1 - sqrt(rho) <= ||w - rho v|| / (2 sqrt(rho))
      const double resid = (w - rho * out.v).norm();
      if (resid <= 2.0 * std::sqrt(rho) * sigma_slack) {
        out.v = w / wn;
        out.converged = true;
        break;
      }
    }
    out.v = w / wn;
    if (std::abs(rho - rho_prev) <= kPowerIterTol * std::max(rho, 1e-300)) {
      out.converged = true;
      break;
    }
    rho_prev = rho;
  }

  y.noalias() = q * out.v;
  out.sigma = y.norm();
  if (out.sigma > 0.0) {
    out.u = y / out.sigma;
  } else {
    out.u = Eigen::VectorXd::Zero(q.rows());
    out.u(0) = 1.0;
    out.v = Eigen::VectorXd::Zero(n);
    out.v(0) = 1.0;
  }
  return out;
}

Point lmo(const FeasibleSet& set, const Point& q, LmoInfo* info) {
  set.check_dim(q);
  check_finite(q, "lmo");
  if (info) {
    *info = LmoInfo{};
  }

  switch (set.kind()) {
    case SetKind::L1Ball: {
      Eigen::Index best = 0;
      double best_abs = -1.0;
      for (Eigen::Index j = 0; j < q.size(); ++j) {
        const double a = std::abs(q.values[j]);
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      const double sign = q.values[best] >= 0.0 ? 1.0 : -1.0;
      Point v = Point::zeros(q.size());
      v.values[best] = -set.radius() * sign;
      return v;
    }
    case SetKind::NuclearBall: {
      const auto pair =
          leading_singular_pair(q.matrix(set.rows(), set.cols()), nullptr);
      if (info) {
        info->converged = pair.converged;
        info->iterations = pair.iterations;
      }
      Point v = Point::zeros(set.rows(), set.cols());
      v.matrix(set.rows(), set.cols()).noalias() =
          -set.radius() * pair.u * pair.v.transpose();
      return v;
    }
    case SetKind::Box: {
      Point v = Point::zeros(q.size());
      for (Eigen::Index j = 0; j < q.size(); ++j) {
        v.values[j] = q.values[j] > 0.0 ? set.lo()[j] : set.hi()[j];
        if (q.values[j] == 0.0) {
          v.values[j] = set.lo()[j];
        }
      }
      return v;
    }
  }
  throw std::logic_error("lmo: unknown set kind");
}

Eigen::VectorXd project_l1(const Eigen::VectorXd& v, double radius) {
  if (v.cwiseAbs().sum() <= radius) {
    return v;
  }
  Eigen::VectorXd u = v.cwiseAbs();
  std::sort(u.data(), u.data() + u.size(), std::greater<double>());
  double running = 0.0;
  double tau = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    running += u[j];
    const double candidate = (running - radius) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) {
      tau = candidate;
    } else {
      break;
    }
  }
  Eigen::VectorXd out(v.size());
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const double mag = std::max(std::abs(v[j]) - tau, 0.0);
    out[j] = v[j] >= 0.0 ? mag : -mag;
  }
  return out;
}

Point project(const FeasibleSet& set, const Point& p) {
  set.check_dim(p);
  check_finite(p, "project");

  switch (set.kind()) {
    case SetKind::L1Ball:
      return Point(project_l1(p.values, set.radius()));
    case SetKind::NuclearBall: {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(
          p.matrix(set.rows(), set.cols()),
          Eigen::ComputeThinU | Eigen::ComputeThinV);
      const Eigen::VectorXd s = svd.singularValues();
      if (s.sum() <= set.radius()) {
        Point out = p;
        out.shape = Shape{set.rows(), set.cols()};
        return out;
      }
      const Eigen::VectorXd s_proj = project_l1(s, set.radius());
      Point out = Point::zeros(set.rows(), set.cols());
      out.matrix(set.rows(), set.cols()).noalias() =
          svd.matrixU() * s_proj.asDiagonal() * svd.matrixV().transpose();
      return out;
    }
    case SetKind::Box: {
      Point out(p.values.cwiseMax(set.lo()).cwiseMin(set.hi()));
      out.shape = p.shape;
      return out;
    }
  }
  throw std::logic_error("project: unknown set kind");
}

bool contains(const FeasibleSet& set, const Point& p, double tol) {
  if (tol < 0.0) {
    throw std::invalid_argument("contains: tolerance must be nonnegative");
  }
  set.check_dim(p);
  if (!p.is_finite()) {
    return false;
  }
  switch (set.kind()) {
    case SetKind::L1Ball:
      return p.values.cwiseAbs().sum() <= set.radius() + tol;
    case SetKind::NuclearBall: {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(p.matrix(set.rows(), set.cols()));
      return svd.singularValues().sum() <= set.radius() + tol;
    }
    case SetKind::Box:
      return ((p.values - set.lo()).array() >= -tol).all() &&
             ((set.hi() - p.values).array() >= -tol).all();
  }
  return false;
}

}  // namespace markovsa
