#pragma once

#include <Eigen/Core>

#include "markovsa/point.hpp"

namespace markovsa {

enum class SetKind { L1Ball, NuclearBall, Box };

// Constraint set with the three primitives the solvers need: exact
// projection, linear minimization oracle and diameter.
class FeasibleSet {
 public:
  static FeasibleSet l1_ball(double radius, Eigen::Index dim);
  static FeasibleSet nuclear_ball(double radius, Eigen::Index rows,
                                  Eigen::Index cols);
  static FeasibleSet box(Eigen::VectorXd lo, Eigen::VectorXd hi);

  SetKind kind() const { return kind_; }
  double radius() const { return radius_; }
  Eigen::Index dim() const { return dim_; }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }

  double diameter() const;

  // throws std::invalid_argument unless p matches this set's dimension
  void check_dim(const Point& p) const;

 private:
  FeasibleSet() = default;

  SetKind kind_ = SetKind::L1Ball;
  double radius_ = 0.0;
  Eigen::Index dim_ = 0;
  Eigen::Index rows_ = 0, cols_ = 0;
  Eigen::VectorXd lo_, hi_;
};

struct LmoInfo {
  bool converged = true;
  int iterations = 0;
};

// argmin over the set of <q, v>. Ties break to the lowest index and
// sign(0) := +1 so reruns are bit-identical.
Point lmo(const FeasibleSet& set, const Point& q, LmoInfo* info = nullptr);

// Euclidean (Frobenius) projection onto the set.
Point project(const FeasibleSet& set, const Point& p);

// membership up to additive tolerance on the defining norm / bounds
bool contains(const FeasibleSet& set, const Point& p, double tol);

// Leading singular pair of q via power iteration on q^T q. Starts from
// the normalized all-ones vector unless v0 is supplied (warm start).
// Caps at 1000 iterations with relative tolerance 1e-10 on the Rayleigh
// quotient. When sigma_slack > 0 the iteration may also stop once the
// certified gap sigma_1 - sigma(v) <= sigma_slack, via the symmetric
// eigenvalue residual bound; projection residuals have tied leading
// singular values on which the plain Rayleigh test cannot terminate
// early.
struct SingularPair {
  double sigma = 0.0;
  Eigen::VectorXd u, v;
  bool converged = true;
  int iterations = 0;
};
SingularPair leading_singular_pair(const Eigen::Ref<const RowMatrixXd>& q,
                                   const Eigen::VectorXd* v0 = nullptr,
                                   double sigma_slack = 0.0);

// Projection of a vector onto the l1 ball of the given radius
// (sort-and-threshold); returns the input unchanged when feasible.
Eigen::VectorXd project_l1(const Eigen::VectorXd& v, double radius);

}  // namespace markovsa
