#pragma once
#include <Eigen/Dense>
#include <array>

#include "cve/expsum.hpp"
#include "cve/params.hpp"

namespace cve {

// All two-time functions are written in s = -t >= 0 (distance into the past).

// Smooth part of the field covariance.
//   <b1(-s) b2(-s')>_sym = b12(s - s') for s > s', 0 otherwise
//   <b2(-s) b2(-s')>_sym = delta + b22(|s - s'|)
//   <b1 b1> = delta
struct FieldKernel {
  Eigen::Matrix2d delta_coeff = Eigen::Matrix2d::Identity();
  ExpSum b12;
  ExpSum b22;
};

// Oscillator at the reference time plus its correlations with the past field:
// cross[i][j](s) = <X_i(0) b_j(-s)>_sym, X = (x, p) in zero-point units.
struct OscState {
  Eigen::Matrix2d a_block = Eigen::Matrix2d::Identity();
  std::array<std::array<ExpSum, 2>, 2> cross;
};

// e^{-gamma t} sin(w~ t)/w~ for t >= 0
double greens_function(const SystemParams& p, double t);

// Stationary 2x2 covariance of (x, p) in zero-point units.
Eigen::Matrix2d osc_steady_covariance(const SystemParams& p);

// Physical-unit building blocks as exponential sums in s.
ExpSum green_terms(const SystemParams& p);
// stationary <x(t) x(t - s)>, physical units
ExpSum autocorrelation_terms(const SystemParams& p);

OscState steady_state(const SystemParams& p);
Eigen::Matrix2d cross_covariance(const SystemParams& p, double t);
Eigen::Matrix2d cross_covariance(const OscState& osc, double t);
FieldKernel field_kernel(const SystemParams& p);

// Free thermal evolution with the coupling switched off.
Eigen::Matrix2d transfer_matrix(const SystemParams& p, double tau);  // zero-point units
Eigen::Matrix2d diffusion_matrix(const SystemParams& p, double tau);  // zero-point units
OscState propagate_free(const SystemParams& p, const OscState& osc, double tau);

}  // namespace cve
