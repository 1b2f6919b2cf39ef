#include "cve/decoherence.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "cve/analytic.hpp"
#include "cve/errors.hpp"
#include "cve/wiener_hopf.hpp"

namespace cve {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

EntanglementResult entanglement_after(const SystemParams& p, double tau, const GridPolicy& policy) {
  validate_params(p);
  if (!(tau >= 0)) throw DomainError("entanglement_after: tau must be >= 0");
  OscState osc = propagate_free(p, steady_state(p), tau);
  return entanglement_grid(p, osc, policy);
}

BoundaryProbe min_symplectic_after(const SystemParams& p, double tau, int level) {
  OscState osc = propagate_free(p, steady_state(p), tau);
  auto basis = make_basis(p, grid_level(p, level));
  Mat v = build_grid_covariance(osc, field_kernel(p), basis);
  Physicality phys = check_physicality(v);
  BoundaryProbe b;
  b.threshold = 1.0 - below_unity_tol(phys.margin);
  Mat pt = partial_transpose(v, {0});
  if (pt.rows() <= 400)
    b.nu_min = symplectic_eigenvalues(pt).front();
  else
    b.nu_min = smallest_symplectic_eigenvalues(pt, 1, 1.0).front();
  return b;
}

SurvivalResult survival_time(const SystemParams& p, const SurvivalOptions& opt) {
  validate_params(p);
  OscState osc0 = steady_state(p);
  SurvivalResult r;
  // signed distance to the entanglement boundary: negative while entangled
  std::function<double(double)> gap;
  WienerHopfOptions wo;
  wo.allow_multiple = true;
  if (opt.method == SurvivalMethod::Grid) {
    r.method = "grid-bisection";
    gap = [&](double tau) { return min_symplectic_after(p, tau, opt.grid_level).gap(); };
  } else {
    r.method = "wiener-hopf-sign";
    gap = [&](double tau) {
      auto e = solve_lambda(p, propagate_free(p, osc0, tau), wo);
      return e.e_n > 0 ? -e.e_n : 1.0;
    };
  }
  double g0 = gap(0.0);
  ++r.evaluations;
  if (g0 >= 0) throw NoEntanglementError("survival_time: no entanglement at tau = 0");
  double lo = 0.0, hi = kPi / p.omega_m, prev = g0;
  std::ostringstream note;
  int d = 0;
  for (;; ++d) {
    if (d >= opt.max_doublings) {
      std::ostringstream os;
      os << "survival_time: still entangled at tau = " << lo << " after " << d << " doublings";
      throw ConvergenceError(os.str());
    }
    double g = gap(hi);
    ++r.evaluations;
    if (g >= 0) break;
    if (g < prev - 1e-9) note << "non-monotone step at tau=" << hi << "; ";
    prev = g;
    lo = hi;
    hi *= 2.0;
  }
  double glo = prev;
  while ((hi - lo) * p.omega_m > opt.theta_tol) {
    double mid = 0.5 * (lo + hi);
    double g = gap(mid);
    ++r.evaluations;
    if (g < 0) {
      lo = mid;
      glo = g;
    } else {
      hi = mid;
    }
  }
  r.bracket_lo = lo;
  r.bracket_hi = hi;
  r.tau_s = 0.5 * (lo + hi);
  r.theta_s = r.tau_s * p.omega_m;
  r.residual = opt.method == SurvivalMethod::Grid ? glo : 0.0;
  r.note = note.str();
  return r;
}

double transcendental_residual(const SystemParams& p, double th) {
  double f2 = p.omega_f * p.omega_f, q2 = p.omega_q * p.omega_q, w4 = std::pow(p.omega_m, 4);
  double s = std::sin(th);
  return 4.0 * f2 * f2 * th * th - (2.0 * f2 + q2) * (2.0 * f2 + q2) * s * s - 25.0 * w4;
}

SurvivalResult survival_time_transcendental(const SystemParams& p) {
  validate_params(p);
  SurvivalResult r;
  r.method = "transcendental";
  const double step = 1e-2, top = 1e3;
  double a = 0.0, fa = transcendental_residual(p, a);
  bool found = false;
  double b = a, fb = fa;
  for (int i = 1; a < top; ++i) {
    b = i * step;
    fb = transcendental_residual(p, b);
    ++r.evaluations;
    if ((fa < 0) != (fb < 0)) {
      found = true;
      break;
    }
    a = b;
    fa = fb;
  }
  if (!found) throw ConvergenceError("survival_time_transcendental: no positive root in (0, 1000]");
  for (int it = 0; it < 200 && b - a > 4e-16 * b; ++it) {
    double m = 0.5 * (a + b), fm = transcendental_residual(p, m);
    ++r.evaluations;
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  r.theta_s = std::abs(fa) < std::abs(fb) ? a : b;
  r.tau_s = r.theta_s / p.omega_m;
  r.bracket_lo = a / p.omega_m;
  r.bracket_hi = b / p.omega_m;
  r.residual = transcendental_residual(p, r.theta_s);
  return r;
}

SurvivalResult survival_time_closed_form(const SystemParams& p) {
  validate_params(p);
  SurvivalResult r;
  r.method = "high-q closed form";
  r.theta_s = p.theta_s_from_nth();
  r.tau_s = r.theta_s / p.omega_m;
  return r;
}

}  // namespace cve
