#pragma once
#include <string>
#include <vector>

#include "cve/analytic.hpp"
#include "cve/gaussian.hpp"
#include "cve/params.hpp"

namespace cve {

// Single temporal mode of the output field, f = g1 + i g2, supported on t <= 0.
// In s = -t: g1(s) = -A1 e^{-gamma_g s} sin(omega_g s), g2(s) = A2 e^{-gamma_g s} cos(omega_g s).
// Modes produced by next_order_mode are that shape with the modes in `deflate` projected out
// and renormalized (parametric = false); g1, g2 hold the resulting exponential sums.
struct ModeWeight {
  double omega_g = 1.0;
  double gamma_g = 0.0;
  double zeta = 0.0;
  double theta_1 = -1.5707963267948966;
  double theta_2 = 0.0;
  double a_1 = 0.0;
  double a_2 = 0.0;
  bool parametric = true;
  ExpSum g1;
  ExpSum g2;
  std::vector<ModeWeight> deflate;
};

// Lowest admissible omega_g: gamma_g = 0.
double omega_g_floor(const SystemParams& p);
double gamma_g_from_omega(const SystemParams& p, double omega_g);
double omega_g_from_gamma(const SystemParams& p, double gamma_g);

// A_k^2 from the closed-form normalization of one exponential-cosine component.
double mode_amplitude_sq(double gamma_g, double omega_g, double theta, double weight);

ModeWeight make_mode(const SystemParams& p, double omega_g, double zeta);
ModeWeight make_mode_from_gamma(const SystemParams& p, double gamma_g, double zeta);

double mode_norm(const ModeWeight& m);                 // (f|f)
cplx mode_overlap(const ModeWeight& a, const ModeWeight& b);  // (f_a|f_b)
double weight_at(const ExpSum& g, double t);           // g(t), zero for t > 0

// Covariance over [x, p, X, Y] with X = int(g1 b1 - g2 b2), Y = int(g2 b1 + g1 b2).
// The SystemParams overload is assembled in quad precision and rounded.
Mat subsystem_covariance(const SystemParams& p, const ModeWeight& m);
Mat subsystem_covariance(const OscState& osc, const FieldKernel& k, const ModeWeight& m);

struct SubNegativity {
  double e_n = 0;
  double nu_min = 1;      // stable two-mode formula
  double nu_general = 1;  // general symplectic route
};
SubNegativity sub_negativity(const Mat& v4);

// Minimal partially transposed symplectic eigenvalue of the oscillator + mode state, with the
// covariance and the two-mode formula evaluated in quad precision. For strong fields the 4x4
// matrix has condition number ~1e23, so rounding its entries to double loses nu entirely.
double mode_min_symplectic(const SystemParams& p, const ModeWeight& m);
double mode_negativity(const SystemParams& p, const ModeWeight& m);

struct StartTrace {
  double omega_start = 0;
  double zeta_start = 0;
  double omega_end = 0;
  double zeta_end = 0;
  double gamma_end = 0;
  double e_n = 0;
  int evaluations = 0;
  bool converged = false;
};

struct ModeOptions {
  double tol = 1e-6;
  int max_evaluations = 500;
  bool reverse_starts = false;
};

struct ModeOptimum {
  ModeWeight mode;
  double e_n_sub = 0;
  std::vector<StartTrace> starts;
  std::string note;
};

// Seed for the strong-field optimum frequency.
double omega_g_fit(const SystemParams& p);

ModeOptimum optimize_mode(const SystemParams& p, const ModeOptions& opt = {});

struct ScanPoint {
  double omega_g = 0;
  double e_n_sub = 0;
};
std::vector<ScanPoint> mode_scan(const SystemParams& p, const std::vector<double>& omega_g,
                                 double zeta);

// Optimum of the family after projecting out the previous (orthonormal) modes.
ModeOptimum next_order_mode(const SystemParams& p, const std::vector<ModeWeight>& previous,
                            const ModeOptions& opt = {});

struct LoSample {
  double t = 0;
  double l1 = 0;
  double l2 = 0;
};
// Quadrature angle zeta_q: L1 = g1 sin zq + g2 cos zq, L2 = g2 sin zq - g1 cos zq.
std::vector<LoSample> lo_waveform(const ModeWeight& m, double zeta_q,
                                  const std::vector<double>& times);

}  // namespace cve
