#pragma once

#include <functional>

#include "markovsa/geometry.hpp"
#include "markovsa/point.hpp"

namespace markovsa {

// Probe settings for in-run suboptimality measurement. The mean-gradient
// surrogate costs burn_in + n chain steps per probe, so V and the FW gap
// are only evaluated every `cadence` iterations (0 means ceil(N/100)).
// The output iterate's V uses the final_* sizes (0 means same as n /
// burn_in).
struct MetricProbe {
  int cadence = 0;
  int burn_in = 500;
  int n = 2000;
  bool compute_v = true;
  bool compute_fw_gap = true;
  bool compute_loss = true;
  bool final_v = true;
  int final_burn_in = 0;
  int final_n = 0;
  int theta_snapshot_cadence = 0;  // 0 disables snapshots

  void validate() const;
};

// beta (theta - proj(theta - g/beta)); equals g when the projection is
// inactive.
Point gradient_mapping(const FeasibleSet& set, const Point& theta,
                       const Point& g, double beta);

// max_{y in set} <g, theta - y>, computed with one LMO call.
double fw_gap(const FeasibleSet& set, const Point& theta, const Point& g);

// ||proj(theta - z/beta) - theta||^2 + ||z - grad_f||^2
double suboptimality_v(const FeasibleSet& set, const Point& theta,
                       const Point& z, const Point& grad_f, double beta);

// (f - f*) - phi + alpha1 ||grad_f - z||^2; alpha1 = 0 drops the
// gradient-tracking penalty.
double merit_w(double f_value, double f_star, double phi, const Point& grad_f,
               const Point& z, double alpha1);

// ||G(theta, z, beta)||^2 <= max(2, 2 beta^2) V(theta, z), within 1e-9
// relative slack.
bool check_prop_12(const FeasibleSet& set, const Point& theta, const Point& z,
                   const Point& grad_f, double beta);

// ||G(theta, grad_f, beta)||^2 <= fw_gap(theta, grad_f), within 1e-9
// relative slack. Holds for beta <= 1.
bool check_prop_11(const FeasibleSet& set, const Point& theta,
                   const Point& grad_f, double beta);

// Max over coordinates of the relative error between the analytic
// gradient and central differences with per-coordinate step h (1+|x_j|).
double finite_diff_check(const std::function<double(const Point&)>& loss,
                         const std::function<Point(const Point&)>& grad,
                         const Point& theta, double h);

}  // namespace markovsa
