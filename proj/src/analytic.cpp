#include "cve/analytic.hpp"

#include <cmath>

#include "cve/errors.hpp"

namespace cve {

namespace {

double sx(const SystemParams& p) { return std::sqrt(2.0 * p.omega_m); }
double sp(const SystemParams& p) { return std::sqrt(2.0 / p.omega_m); }

// Thermal-plus-backaction white force strength
double force_strength(const SystemParams& p) { return p.eta() * p.eta() + p.s_f(); }

}  // namespace

double greens_function(const SystemParams& p, double t) {
  if (t < 0) throw DomainError("greens_function: t must be >= 0");
  double w = p.omega_tilde();
  return std::exp(-p.gamma_m * t) * std::sin(w * t) / w;
}

Eigen::Matrix2d osc_steady_covariance(const SystemParams& p) {
  double d = force_strength(p);
  double vx = d / (4.0 * p.gamma_m * p.omega_m * p.omega_m);
  double vp = d / (4.0 * p.gamma_m);
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  a(0, 0) = vx * 2.0 * p.omega_m;
  a(1, 1) = vp * 2.0 / p.omega_m;
  return a;
}

ExpSum green_terms(const SystemParams& p) {
  double w = p.omega_tilde();
  cplx rp(-p.gamma_m, w), rm(-p.gamma_m, -w);
  cplx c = 1.0 / cplx(0, 2.0 * w);
  return {{c, rp}, {-c, rm}};
}

ExpSum autocorrelation_terms(const SystemParams& p) {
  double w = p.omega_tilde(), g = p.gamma_m;
  double vx = force_strength(p) / (4.0 * g * p.omega_m * p.omega_m);
  cplx rp(-g, w), rm(-g, -w);
  // Vx e^{-g s}[cos ws + (g/w) sin ws]
  cplx k = g / w / cplx(0, 2.0);
  return {{vx * (0.5 + k), rp}, {vx * (0.5 - k), rm}};
}

OscState steady_state(const SystemParams& p) {
  OscState o;
  o.a_block = osc_steady_covariance(p);
  ExpSum g = green_terms(p), r = autocorrelation_terms(p);
  double eta = p.eta(), kap = p.kappa();
  o.cross[0][0] = scaled(g, eta * sx(p));
  o.cross[1][0] = scaled(derivative(g), eta * sp(p));
  o.cross[0][1] = scaled(r, kap * sx(p));
  o.cross[1][1] = scaled(derivative(r), kap * sp(p));
  return o;
}

Eigen::Matrix2d cross_covariance(const OscState& osc, double t) {
  if (t > 0) throw DomainError("cross_covariance: t must be <= 0");
  Eigen::Matrix2d c;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c(i, j) = eval_real(osc.cross[i][j], -t);
  return c;
}

Eigen::Matrix2d cross_covariance(const SystemParams& p, double t) {
  return cross_covariance(steady_state(p), t);
}

FieldKernel field_kernel(const SystemParams& p) {
  FieldKernel k;
  double kap = p.kappa();
  k.b12 = scaled(green_terms(p), kap * p.eta());
  k.b22 = scaled(autocorrelation_terms(p), kap * kap);
  return k;
}

Eigen::Matrix2d transfer_matrix(const SystemParams& p, double tau) {
  if (tau < 0) throw DomainError("transfer_matrix: tau must be >= 0");
  double w = p.omega_tilde(), g = p.gamma_m, wm2 = p.omega_m * p.omega_m;
  double e = std::exp(-g * tau), c = std::cos(w * tau), s = std::sin(w * tau);
  Eigen::Matrix2d phi;
  phi << e * (c + g / w * s), e * s / w, -e * wm2 * s / w, e * (c - g / w * s);
  Eigen::Matrix2d S = Eigen::Vector2d(sx(p), sp(p)).asDiagonal();
  return S * phi * S.inverse();
}

Eigen::Matrix2d diffusion_matrix(const SystemParams& p, double tau) {
  // N = Sigma - Phi Sigma Phi^T with Sigma the thermal-only stationary covariance
  SystemParams th = p;
  th.omega_q = 0.0;
  Eigen::Matrix2d sig = osc_steady_covariance(th);
  Eigen::Matrix2d phi = transfer_matrix(p, tau);
  Eigen::Matrix2d n = sig - phi * sig * phi.transpose();
  return 0.5 * (n + n.transpose());
}

OscState propagate_free(const SystemParams& p, const OscState& osc, double tau) {
  if (tau < 0) throw DomainError("propagate_free: tau must be >= 0");
  Eigen::Matrix2d phi = transfer_matrix(p, tau);
  OscState out;
  out.a_block = phi * osc.a_block * phi.transpose() + diffusion_matrix(p, tau);
  out.a_block = 0.5 * (out.a_block + out.a_block.transpose()).eval();
  for (int j = 0; j < 2; ++j)
    for (int i = 0; i < 2; ++i)
      out.cross[i][j] = combine(phi(i, 0), osc.cross[0][j], phi(i, 1), osc.cross[1][j]);
  return out;
}

}  // namespace cve
