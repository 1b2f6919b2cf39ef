#include "cve/params.hpp"

#include <cmath>
#include <string>

#include "cve/errors.hpp"

namespace cve {

double SystemParams::omega_tilde() const {
  return std::sqrt(omega_m * omega_m - gamma_m * gamma_m);
}

void validate_params(const SystemParams& p) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(p.omega_m) || !finite(p.gamma_m) || !finite(p.omega_q) || !finite(p.omega_f) ||
      !finite(p.n_th))
    throw InvalidParameter("non-finite parameter");
  if (p.omega_m <= 0) throw InvalidParameter("omega_m must be positive");
  if (p.gamma_m <= 0) throw InvalidParameter("gamma_m must be positive");
  if (p.gamma_m >= p.omega_m) throw InvalidParameter("overdamped oscillator (q_m <= 1/2)");
  if (p.omega_q < 0) throw InvalidParameter("omega_q must be >= 0");
  if (p.omega_f < 0) throw InvalidParameter("omega_f must be >= 0");
  double lhs = p.omega_f * p.omega_f;
  double rhs = p.gamma_m * p.omega_m * (2.0 * p.n_th + 1.0);
  if (std::abs(lhs - rhs) > 1e-12 * std::max(std::abs(lhs), std::abs(rhs)) + 1e-300)
    throw InvalidParameter("omega_f^2 != gamma_m omega_m (2 n_th + 1)");
}

SystemParams build_params(double omega_m, double q_m, double omega_q,
                          std::optional<double> omega_f, std::optional<double> n_th) {
  if (!std::isfinite(omega_m) || !std::isfinite(q_m) || !std::isfinite(omega_q))
    throw InvalidParameter("non-finite parameter");
  if (omega_m <= 0) throw InvalidParameter("omega_m must be positive");
  if (q_m <= 0.5) throw InvalidParameter("q_m must exceed 1/2");
  if (omega_q < 0) throw InvalidParameter("omega_q must be >= 0");
  SystemParams p;
  p.omega_m = omega_m;
  p.gamma_m = omega_m / (2.0 * q_m);
  p.omega_q = omega_q;
  double unit = p.gamma_m * p.omega_m;
  if (omega_f && !std::isfinite(*omega_f)) throw InvalidParameter("non-finite omega_f");
  if (n_th && !std::isfinite(*n_th)) throw InvalidParameter("non-finite n_th");
  if (omega_f && *omega_f < 0) throw InvalidParameter("omega_f must be >= 0");
  if (n_th && *n_th < -0.5) throw InvalidParameter("n_th must be >= -1/2");
  if (omega_f && n_th) {
    double want = std::sqrt(unit * (2.0 * *n_th + 1.0));
    if (std::abs(want - *omega_f) > 1e-9 * std::max(want, *omega_f))
      throw ConflictError("omega_f and n_th both given and inconsistent");
  }
  if (omega_f) {
    p.omega_f = *omega_f;
    p.n_th = (p.omega_f * p.omega_f / unit - 1.0) / 2.0;
  } else {
    p.n_th = n_th ? *n_th : 0.0;
    p.omega_f = std::sqrt(unit * (2.0 * p.n_th + 1.0));
  }
  // store n_th so the invariant holds to rounding
  p.n_th = (p.omega_f * p.omega_f / unit - 1.0) / 2.0;
  return p;
}

}  // namespace cve
