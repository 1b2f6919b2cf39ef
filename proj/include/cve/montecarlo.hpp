#pragma once
#include <cstdint>
#include <vector>

#include "cve/gaussian.hpp"
#include "cve/params.hpp"

namespace cve {

struct SimConfig {
  double dt = 0.005;         // integrator step inside the field window
  double t_relax = 0;        // burn-in; 0 means 10/gamma_m
  double burn_step = 1.0;    // exact Gaussian transition step used for burn-in
  double window = 5.0;       // field window [-window, 0]
  double bin_width = 0.1;    // output bin duration
  int n_traj = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
};

void validate_config(const SystemParams& p, const SimConfig& c);
int bin_count(const SimConfig& c);

// Oscillator at t = 0 in zero-point units plus normalized bin quadratures,
// bin j covering t in [-(j + 1) bin_width, -j bin_width].
struct TrajectorySample {
  double x = 0;
  double p = 0;
  std::vector<double> X;
  std::vector<double> Y;
  // ordering [x, p, X_0, Y_0, X_1, Y_1, ...]
  Vec flatten() const;
};

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index);
TrajectorySample simulate_trajectory(const SystemParams& p, const SimConfig& c, std::uint64_t index);

struct CovEstimate {
  Mat mean;
  Mat se;
  int n_traj = 0;
};

// Symmetrized second moments of the first n samples (all when n <= 0),
// standard errors by delete-one-block jackknife.
CovEstimate estimate_from_samples(const std::vector<Vec>& samples, int n = 0, int blocks = 50);
std::vector<Vec> simulate_ensemble(const SystemParams& p, const SimConfig& c);
CovEstimate estimate_covariance(const SystemParams& p, const SimConfig& c);

// Analytic reference: top-hat grid covariance on the same bins. kernel_scale multiplies the
// smooth field kernels and the cross columns (1 = exact; other values are a test fixture).
Mat reference_covariance(const SystemParams& p, const SimConfig& c, double kernel_scale = 1.0);

struct ValidationReport {
  int entries = 0;
  int within = 0;
  double fraction = 0;
  double max_abs_z = 0;
  double rms_error_full = 0;
  double rms_error_half = 0;
  double scaling_ratio = 0;  // rms_half / rms_full, ideally sqrt(2)
  bool fraction_ok = false;
  bool scaling_ok = false;
  bool passed = false;
  int n_traj = 0;
};

ValidationReport compare(const CovEstimate& full, const CovEstimate& half, const Mat& reference,
                         double z_gate = 5.0, double min_fraction = 0.99);
ValidationReport validate(const SystemParams& p, const SimConfig& c, double kernel_scale = 1.0);

}  // namespace cve
