#pragma once

#include "markovsa/geometry.hpp"
#include "markovsa/point.hpp"

namespace markovsa {

// Parameters of the inner conditional-gradient loop: regularization
// weight beta, LMO accuracy budget omega (the LMO here is exact, so the
// slack condition holds for any omega >= 0) and inner iteration count.
struct IcgParams {
  double beta = 1.0;
  double omega = 1.0;
  int iterations = 1;

  void validate() const;
};

// Exact minimizer of <z, y - theta> + (beta/2) ||y - theta||^2 over the
// set, i.e. the projection of theta - z/beta.
Point solve_exact(const FeasibleSet& set, const Point& z, const Point& theta,
                  double beta);

struct IcgResult {
  Point w;
  long lmo_calls = 0;
  long power_iterations = 0;  // nuclear-ball LMO work, for diagnostics
  bool lmo_converged = true;  // false if any power iteration hit its cap
};

// Frank-Wolfe inner loop on the regularized subproblem: w_0 = theta,
// q_i = z + beta (w_i - theta), v_i = lmo(q_i), w_{i+1} =
// (1 - mu_i) w_i + mu_i v_i with mu_i = 2/(i+2), returning w_t.
// Guarantee: ||w_t - solve_exact(...)||^2 <= 4 D^2 (1+omega) / (t+2).
IcgResult icg_solve_ex(const FeasibleSet& set, const Point& z,
                       const Point& theta, const IcgParams& params);

Point icg_solve(const FeasibleSet& set, const Point& z, const Point& theta,
                const IcgParams& params);

// Optimal value of the regularized subproblem; nonpositive since y = theta
// is feasible.
double phi_value(const FeasibleSet& set, const Point& theta, const Point& z,
                 double beta);

}  // namespace markovsa
