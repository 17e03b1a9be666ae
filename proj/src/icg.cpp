#include "markovsa/icg.hpp"

#include <cmath>
#include <stdexcept>

namespace markovsa {

namespace {

constexpr double kFeasTol = 1e-9;

void check_inputs(const FeasibleSet& set, const Point& z, const Point& theta,
                  double beta) {
  set.check_dim(z);
  set.check_dim(theta);
  if (!(beta > 0.0)) {
    throw std::invalid_argument("icg: beta must be positive");
  }
  if (!z.is_finite() || !theta.is_finite()) {
    throw std::invalid_argument("icg: non-finite input");
  }
  if (!contains(set, theta, kFeasTol)) {
    throw std::invalid_argument("icg: theta is not feasible");
  }
}

}  // namespace

void IcgParams::validate() const {
  if (!(beta > 0.0)) {
    throw std::invalid_argument("IcgParams: beta must be positive");
  }
  if (omega < 0.0) {
    throw std::invalid_argument("IcgParams: omega must be nonnegative");
  }
  if (iterations < 1) {
    throw std::invalid_argument("IcgParams: iterations must be at least 1");
  }
}

Point solve_exact(const FeasibleSet& set, const Point& z, const Point& theta,
                  double beta) {
  check_inputs(set, z, theta, beta);
  Point target(theta.values - z.values / beta);
  target.shape = theta.shape;
  return project(set, target);
}

IcgResult icg_solve_ex(const FeasibleSet& set, const Point& z,
                       const Point& theta, const IcgParams& params) {
  params.validate();
  check_inputs(set, z, theta, params.beta);

  const double beta = params.beta;
  const int t = params.iterations;
  IcgResult res;
  res.w = theta;
  Eigen::VectorXd& w = res.w.values;
  Eigen::VectorXd q(w.size());

  switch (set.kind()) {
    case SetKind::L1Ball: {
      const double radius = set.radius();
      for (int i = 0; i < t; ++i) {
        q = z.values + beta * (w - theta.values);
        Eigen::Index best = 0;
        double best_abs = -1.0;
        for (Eigen::Index j = 0; j < q.size(); ++j) {
          const double a = std::abs(q[j]);
          if (a > best_abs) {
            best_abs = a;
            best = j;
          }
        }
        const double sign = q[best] >= 0.0 ? 1.0 : -1.0;
        const double mu = 2.0 / (i + 2);
        w *= (1.0 - mu);
        w[best] += mu * (-radius * sign);
        ++res.lmo_calls;
      }
      break;
    }
    case SetKind::Box: {
      for (int i = 0; i < t; ++i) {
        const double mu = 2.0 / (i + 2);
        for (Eigen::Index j = 0; j < w.size(); ++j) {
          const double qj = z.values[j] + beta * (w[j] - theta.values[j]);
          const double vj = qj > 0.0 ? set.lo()[j] : set.hi()[j];
          w[j] = (1.0 - mu) * w[j] + mu * vj;
        }
        ++res.lmo_calls;
      }
      break;
    }
    case SetKind::NuclearBall: {
      const Eigen::Index rows = set.rows(), cols = set.cols();
      const double radius = set.radius();
      const double D = set.diameter();
      auto w_mat = res.w.matrix(rows, cols);
      auto q_mat = Eigen::Map<RowMatrixXd>(q.data(), rows, cols);
      // Inlined power iteration with persistent buffers; same cap and
      // Rayleigh tolerance as leading_singular_pair, plus the omega-slack
      // certificate. The right singular vector warm-starts the next inner
      // iteration; the first one uses the all-ones start, so the whole
      // loop stays deterministic.
      Eigen::VectorXd v = Eigen::VectorXd::Ones(cols);
      v /= v.norm();
      Eigen::VectorXd y(rows), bv(cols), u(rows);
      constexpr int kCap = 1000;
      constexpr double kTol = 1e-10;
      for (int i = 0; i < t; ++i) {
        q = z.values + beta * (w - theta.values);
        // The inner step only needs the omega-slack condition
        // <v, q> <= min <.,q> + beta omega D^2 / (i+2). The residual bound
        // certifies sigma_1 - sigma(v) <= ||(q^T q)v - rho v|| / (2 sqrt(rho))
        // whenever the iterate tracks the leading eigenspace, which the
        // warm start maintains; a plain Rayleigh test alone cannot leave
        // the tied leading blocks that projection residuals produce.
        const double sigma_slack =
            beta * params.omega * D * D / ((i + 2) * radius);
        const double slack2 = 4.0 * sigma_slack * sigma_slack;
        double rho = 0.0, rho_prev = -1.0;
        double sigma = 0.0;
        bool converged = false;
        for (int it = 1; it <= kCap; ++it) {
          ++res.power_iterations;
          y.noalias() = q_mat * v;
          bv.noalias() = q_mat.transpose() * y;  // (q^T q) v
          rho = y.squaredNorm();
          const double bn2 = bv.squaredNorm();
          if (bn2 == 0.0) {
            sigma = 0.0;
            converged = true;
            break;
          }
          // with v unit, v.(Bv) = rho, so ||Bv - rho v||^2 = |Bv|^2 - rho^2
          const double resid2 = std::max(bn2 - rho * rho, 0.0);
          if (rho > 0.0 &&
              (resid2 <= slack2 * rho ||
               std::abs(rho - rho_prev) <= kTol * rho)) {
            sigma = std::sqrt(rho);
            converged = true;
            // hand the refined vector to the next warm start; the update
            // below uses the certified (v, y) pair
            bv /= std::sqrt(bn2);
            break;
          }
          rho_prev = rho;
          v = bv / std::sqrt(bn2);
        }
        res.lmo_converged = res.lmo_converged && converged;
        if (!converged) {
          y.noalias() = q_mat * v;  // capped: evaluate the last iterate
          sigma = y.norm();
        }

        const double mu = 2.0 / (i + 2);
        w *= (1.0 - mu);
        if (sigma > 0.0) {
          u = y / sigma;
          w_mat.noalias() -= (mu * radius) * u * v.transpose();
        } else {
          // q annihilates v (or q == 0): every extreme point is optimal
          w_mat(0, 0) -= mu * radius;
        }
        if (converged && sigma > 0.0) {
          v.swap(bv);  // refined warm start for the next inner iteration
        }
        ++res.lmo_calls;
      }
      res.w.shape = Shape{rows, cols};
      break;
    }
  }

  if (!res.w.is_finite()) {
    throw std::runtime_error("icg_solve: non-finite iterate");
  }
  return res;
}

Point icg_solve(const FeasibleSet& set, const Point& z, const Point& theta,
                const IcgParams& params) {
  return icg_solve_ex(set, z, theta, params).w;
}

double phi_value(const FeasibleSet& set, const Point& theta, const Point& z,
                 double beta) {
  const Point y = solve_exact(set, z, theta, beta);
  const Eigen::VectorXd d = y.values - theta.values;
  return z.values.dot(d) + 0.5 * beta * d.squaredNorm();
}

}  // namespace markovsa
