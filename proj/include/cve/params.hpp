#pragma once
#include <optional>

namespace cve {

// Physical parameters in units hbar = m = 1, omega_m sets the frequency unit.
// Dynamics: x'' + 2 gamma_m x' + omega_m^2 x = eta a1 + xi, with <xi xi> = s_f delta,
// output b2 = a2 + kappa x. Oscillator quadratures are scaled to zero-point units
// (x_n = sqrt(2 omega_m) x, p_n = sqrt(2/omega_m) p).
struct SystemParams {
  double omega_m = 1.0;
  double gamma_m = 5e-4;
  double omega_q = 0.0;
  double omega_f = 0.0;
  double n_th = 0.0;

  double q_m() const { return omega_m / (2.0 * gamma_m); }
  // ringing frequency of the damped oscillator
  double omega_tilde() const;
  double eta() const { return omega_q; }
  double kappa() const { return 2.0 * omega_q; }
  double s_f() const { return 2.0 * omega_f * omega_f; }
  // bath below zero-point (allowed, but flagged)
  bool sub_zero_point_bath() const { return n_th < 0.0; }
  // two equivalent forms of the high-Q survival time
  double theta_s_from_omega_f() const { return 2.5 * omega_m * omega_m / (omega_f * omega_f); }
  double theta_s_from_nth() const { return 5.0 * q_m() / (2.0 * n_th + 1.0); }
};

// At most one of omega_f, n_th may be given; neither means n_th = 0.
SystemParams build_params(double omega_m, double q_m, double omega_q,
                          std::optional<double> omega_f, std::optional<double> n_th);

// Re-check the type invariants; throws InvalidParameter.
void validate_params(const SystemParams& p);

}  // namespace cve
