#include "cve/mode_filter.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/multiprecision/complex128.hpp>

#include "cve/errors.hpp"

namespace cve {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kBad = 1e3;

// e^{-gg s} (c cos ws + d sin ws) as an exponential sum
ExpSum damped_cos_sin(double gg, double w, double c, double d) {
  cplx rp(-gg, w), rm(-gg, -w);
  cplx a = 0.5 * c + d / cplx(0, 2.0);
  return {{a, rp}, {std::conj(a), rm}};
}

double re_line(const ExpSum& f, const ExpSum& h) { return half_line(f, h).real(); }

struct Weights {
  ExpSum u1, u2;
};

// Symmetrized covariance of two field quadratures Q_U = int(u1 b1 + u2 b2).
double field_field(const FieldKernel& k, const Weights& u, const Weights& w) {
  cplx acc = k.delta_coeff(0, 0) * half_line(u.u1, w.u1) + k.delta_coeff(1, 1) * half_line(u.u2, w.u2);
  acc += causal_double(u.u1, w.u2, k.b12) + causal_double(w.u1, u.u2, k.b12);
  acc += causal_double(u.u2, w.u2, k.b22) + causal_double(w.u2, u.u2, k.b22);
  return acc.real();
}

double osc_field(const OscState& osc, int i, const Weights& w) {
  return re_line(w.u1, osc.cross[i][0]) + re_line(w.u2, osc.cross[i][1]);
}

// Nelder-Mead over (ln gamma_g, zeta), minimizing ln nu_min.
struct Objective {
  std::function<double(double, double)> fn;
  int evaluations = 0;
};

double gsl_objective(const gsl_vector* x, void* data) {
  auto* o = static_cast<Objective*>(data);
  ++o->evaluations;
  double lg = gsl_vector_get(x, 0), z = gsl_vector_get(x, 1);
  if (!std::isfinite(lg) || lg > 10.0 || lg < -40.0) return kBad + std::abs(lg);
  if (z < 0.0) return kBad - z;
  if (z >= 0.5 * kPi) return kBad + z;
  double v = o->fn(lg, z);
  return std::isfinite(v) ? v : kBad;
}

StartTrace run_start(Objective& obj, const SystemParams& p, double omega0, double zeta0,
                     const ModeOptions& opt) {
  StartTrace tr;
  tr.omega_start = omega0;
  tr.zeta_start = zeta0;
  double g0 = std::max(gamma_g_from_omega(p, std::max(omega0, omega_g_floor(p))), 1e-3 * p.gamma_m);
  obj.evaluations = 0;
  gsl_multimin_function f{&gsl_objective, 2, &obj};
  gsl_vector* x = gsl_vector_alloc(2);
  gsl_vector* step = gsl_vector_alloc(2);
  gsl_vector_set(x, 0, std::log(g0));
  gsl_vector_set(x, 1, zeta0);
  gsl_vector_set(step, 0, 0.5);
  gsl_vector_set(step, 1, 0.1);
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
  gsl_multimin_fminimizer_set(s, &f, x, step);
  double prev = s->fval;
  int stalls = 0;
  while (obj.evaluations < opt.max_evaluations) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    double size = gsl_multimin_fminimizer_size(s);
    // E_N changes by |d ln nu|; stop when both the simplex and the value settle
    stalls = std::abs(prev - s->fval) < opt.tol ? stalls + 1 : 0;
    prev = s->fval;
    if (size < 1e-6 || (stalls >= 20 && size < 1e-3)) {
      tr.converged = true;
      break;
    }
  }
  double lg = gsl_vector_get(s->x, 0);
  tr.zeta_end = gsl_vector_get(s->x, 1);
  tr.gamma_end = std::exp(lg);
  tr.omega_end = omega_g_from_gamma(p, tr.gamma_end);
  tr.e_n = s->fval < kBad ? std::max(0.0, -s->fval) : 0.0;
  tr.evaluations = obj.evaluations;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(step);
  return tr;
}

std::vector<std::pair<double, double>> start_points(const SystemParams& p, bool reverse) {
  double fit = omega_g_fit(p);
  std::vector<std::pair<double, double>> s = {
      {p.omega_m, kPi / 4}, {2.0 * p.omega_m, kPi / 3}, {fit, kPi / 3}, {0.5 * fit, kPi / 4}};
  if (reverse) std::reverse(s.begin(), s.end());
  return s;
}

ModeOptimum optimize_family(const SystemParams& p, const ModeOptions& opt,
                            const std::function<ModeWeight(double, double)>& build,
                            const std::function<double(const ModeWeight&)>& objective) {
  gsl_set_error_handler_off();
  Objective obj;
  obj.fn = [&](double lg, double z) {
    try {
      double nu = objective(build(std::exp(lg), z));
      return nu > 0 ? std::log(nu) : kBad;
    } catch (const Error&) {
      return kBad;
    }
  };
  ModeOptimum best;
  double best_val = std::numeric_limits<double>::infinity();
  std::pair<double, double> arg{0, 0};
  for (auto [w0, z0] : start_points(p, opt.reverse_starts)) {
    StartTrace tr = run_start(obj, p, w0, z0, opt);
    best.starts.push_back(tr);
    double val = -tr.e_n;
    if (tr.e_n > 0 && val < best_val) {
      best_val = val;
      arg = {tr.gamma_end, tr.zeta_end};
    }
  }
  if (!std::isfinite(best_val)) {
    best.e_n_sub = 0;
    best.note = "no start improved over the separable baseline";
    best.mode = make_mode(p, p.omega_m, kPi / 4);
    return best;
  }
  best.mode = build(arg.first, arg.second);
  best.e_n_sub = std::max(0.0, -std::log(objective(best.mode)));
  return best;
}


// Quad-precision mirror of the exponential-sum algebra used by the 4x4 subsystem matrix.
using qreal = boost::multiprecision::float128;
using qcplx = boost::multiprecision::complex128;

struct QTerm {
  qcplx amp, rate;
};
using QSum = std::vector<QTerm>;

qcplx qc(qreal re, qreal im = 0) { return qcplx(re, im); }

// e^{-gg s} (c cos ws + d sin ws)
QSum q_damped(qreal gg, qreal w, qreal c, qreal d) {
  qcplx a = qc(c / 2, -d / 2);
  return {{a, qc(-gg, w)}, {qc(c / 2, d / 2), qc(-gg, -w)}};
}

QSum q_scaled(const QSum& f, qcplx k) {
  QSum out = f;
  for (auto& t : out) t.amp *= k;
  return out;
}

QSum q_derivative(const QSum& f) {
  QSum out = f;
  for (auto& t : out) t.amp *= t.rate;
  return out;
}

QSum q_axpy(const QSum& f, qreal a, const QSum& g, qreal b) {
  QSum out = q_scaled(f, qc(a));
  for (const auto& t : g) out.push_back({t.amp * qc(b), t.rate});
  return out;
}

qreal q_line(const QSum& f, const QSum& h) {
  qcplx acc = 0;
  for (const auto& a : f)
    for (const auto& b : h) acc -= a.amp * b.amp / (a.rate + b.rate);
  return acc.real();
}

qreal q_causal(const QSum& f, const QSum& h, const QSum& k) {
  qcplx acc = 0;
  for (const auto& a : f)
    for (const auto& b : h)
      for (const auto& c : k) acc += a.amp * b.amp * c.amp / ((a.rate + b.rate) * (a.rate + c.rate));
  return acc.real();
}

struct QModel {
  qreal vx = 0, vp = 0;  // oscillator variances, zero-point units
  QSum cross[2][2];
  QSum b12, b22;
};

QModel q_model(const SystemParams& p) {
  qreal wm = p.omega_m, g = p.gamma_m, eta = p.eta(), kap = p.kappa(), sf = p.s_f();
  qreal wt = sqrt(wm * wm - g * g);
  qreal d = eta * eta + sf;
  qreal vx = d / (4 * g * wm * wm), vp = d / (4 * g);
  qreal sx = sqrt(2 * wm), sp = sqrt(2 / wm);
  QSum green = q_damped(g, wt, 0, 1 / wt);
  QSum r = q_damped(g, wt, vx, vx * g / wt);
  QModel m;
  m.vx = vx * 2 * wm;
  m.vp = vp * 2 / wm;
  m.cross[0][0] = q_scaled(green, qc(eta * sx));
  m.cross[1][0] = q_scaled(q_derivative(green), qc(eta * sp));
  m.cross[0][1] = q_scaled(r, qc(kap * sx));
  m.cross[1][1] = q_scaled(q_derivative(r), qc(kap * sp));
  m.b12 = q_scaled(green, qc(kap * eta));
  m.b22 = q_scaled(r, qc(kap * kap));
  return m;
}

struct QMode {
  QSum g1, g2;
};

QMode q_mode(const SystemParams& p, const ModeWeight& m) {
  qreal wm = p.omega_m, g = p.gamma_m, gg = m.gamma_g, z = m.zeta;
  qreal wg = sqrt(wm * wm - g * g + gg * gg);
  qreal s = gg * gg + wg * wg, sz = sin(z), cz = cos(z);
  qreal a1 = sqrt(4 * gg * s * sz * sz / (wg * wg));
  qreal a2 = sqrt(4 * gg * s * cz * cz / (s + gg * gg));
  QMode f{q_damped(gg, wg, 0, -a1), q_damped(gg, wg, a2, 0)};
  if (m.deflate.empty()) return f;
  for (const auto& prev : m.deflate) {
    QMode e = q_mode(p, prev);
    qreal re = q_line(e.g1, f.g1) + q_line(e.g2, f.g2);
    qreal im = q_line(e.g1, f.g2) - q_line(e.g2, f.g1);
    f.g1 = q_axpy(f.g1, 1, q_axpy(e.g1, re, e.g2, -im), -1);
    f.g2 = q_axpy(f.g2, 1, q_axpy(e.g1, im, e.g2, re), -1);
  }
  qreal n = q_line(f.g1, f.g1) + q_line(f.g2, f.g2);
  if (n < qreal(1e-6)) throw DegeneracyError("candidate lies in the span of the previous modes");
  qreal k = 1 / sqrt(n);
  f.g1 = q_scaled(f.g1, qc(k));
  f.g2 = q_scaled(f.g2, qc(k));
  return f;
}

using Q4 = std::array<std::array<qreal, 4>, 4>;

Q4 q_subsystem(const SystemParams& p, const ModeWeight& m) {
  QModel md = q_model(p);
  QMode f = q_mode(p, m);
  QSum u[2][2] = {{f.g1, q_scaled(f.g2, qc(-1))}, {f.g2, f.g1}};  // X and Y weights on (b1, b2)
  Q4 v{};
  v[0][0] = md.vx;
  v[1][1] = md.vp;
  for (int i = 0; i < 2; ++i)
    for (int a = 0; a < 2; ++a)
      v[i][2 + a] = v[2 + a][i] = q_line(u[a][0], md.cross[i][0]) + q_line(u[a][1], md.cross[i][1]);
  for (int a = 0; a < 2; ++a)
    for (int b = a; b < 2; ++b) {
      qreal acc = q_line(u[a][0], u[b][0]) + q_line(u[a][1], u[b][1]);
      acc += q_causal(u[a][0], u[b][1], md.b12) + q_causal(u[b][0], u[a][1], md.b12);
      acc += q_causal(u[a][1], u[b][1], md.b22) + q_causal(u[b][1], u[a][1], md.b22);
      v[2 + a][2 + b] = v[2 + b][2 + a] = acc;
    }
  return v;
}

qreal det2(qreal a, qreal b, qreal c, qreal d) { return a * d - b * c; }

double q_min_symplectic(const Q4& v) {
  qreal da = det2(v[0][0], v[0][1], v[1][0], v[1][1]);
  qreal db = det2(v[2][2], v[2][3], v[3][2], v[3][3]);
  qreal dc = det2(v[0][2], v[0][3], v[1][2], v[1][3]);
  // det V = det B * det(A - C B^-1 C^T)
  qreal bi[2][2] = {{v[3][3] / db, -v[2][3] / db}, {-v[3][2] / db, v[2][2] / db}};
  qreal s[2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      qreal acc = v[i][j];
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) acc -= v[i][2 + a] * bi[a][b] * v[j][2 + b];
      s[i][j] = acc;
    }
  qreal detv = db * det2(s[0][0], s[0][1], s[1][0], s[1][1]);
  qreal delta = da + db - 2 * dc;
  qreal disc = delta * delta - 4 * detv;
  if (disc < 0) disc = 0;
  qreal nup2 = (delta + sqrt(disc)) / 2;
  if (!(nup2 > 0) || detv < 0) throw DegeneracyError("mode covariance is not positive");
  return static_cast<double>(sqrt(detv / nup2));
}

ExpSum round_sum(const QSum& f) {
  ExpSum out;
  for (const auto& t : f)
    out.push_back({cplx(static_cast<double>(t.amp.real()), static_cast<double>(t.amp.imag())),
                   cplx(static_cast<double>(t.rate.real()), static_cast<double>(t.rate.imag()))});
  return out;
}

}  // namespace

double omega_g_floor(const SystemParams& p) {
  return std::sqrt(p.omega_m * p.omega_m - p.gamma_m * p.gamma_m);
}

double gamma_g_from_omega(const SystemParams& p, double omega_g) {
  double g2 = omega_g * omega_g - p.omega_m * p.omega_m + p.gamma_m * p.gamma_m;
  if (g2 < -1e-12 * p.omega_m * p.omega_m)
    throw DomainError("mode frequency below the floor sqrt(omega_m^2 - gamma_m^2)");
  return std::sqrt(std::max(g2, 0.0));
}

double omega_g_from_gamma(const SystemParams& p, double gamma_g) {
  return std::sqrt(p.omega_m * p.omega_m - p.gamma_m * p.gamma_m + gamma_g * gamma_g);
}

double mode_amplitude_sq(double gg, double wg, double theta, double weight) {
  double s = gg * gg + wg * wg;
  return 4.0 * gg * s * weight / (s + gg * gg * std::cos(2 * theta) + gg * wg * std::sin(2 * theta));
}

ModeWeight make_mode_from_gamma(const SystemParams& p, double gamma_g, double zeta) {
  if (!(gamma_g > 0) || !std::isfinite(gamma_g))
    throw DomainError("mode decay gamma_g must be positive and finite");
  if (!(zeta >= 0 && zeta < 0.5 * kPi)) throw DomainError("zeta must lie in [0, pi/2)");
  ModeWeight m;
  m.gamma_g = gamma_g;
  m.omega_g = omega_g_from_gamma(p, gamma_g);
  m.zeta = zeta;
  double c1 = std::cos(zeta + 0.5 * kPi), c2 = std::cos(zeta + kPi);
  m.a_1 = std::sqrt(mode_amplitude_sq(gamma_g, m.omega_g, m.theta_1, c1 * c1));
  m.a_2 = std::sqrt(mode_amplitude_sq(gamma_g, m.omega_g, m.theta_2, c2 * c2));
  m.g1 = damped_cos_sin(gamma_g, m.omega_g, 0.0, -m.a_1);
  m.g2 = damped_cos_sin(gamma_g, m.omega_g, m.a_2, 0.0);
  return m;
}

ModeWeight make_mode(const SystemParams& p, double omega_g, double zeta) {
  double gg = gamma_g_from_omega(p, omega_g);
  if (gg <= 0) throw DomainError("omega_g at the floor gives an unnormalizable mode (gamma_g = 0)");
  return make_mode_from_gamma(p, gg, zeta);
}

double mode_norm(const ModeWeight& m) { return re_line(m.g1, m.g1) + re_line(m.g2, m.g2); }

cplx mode_overlap(const ModeWeight& a, const ModeWeight& b) {
  double re = re_line(a.g1, b.g1) + re_line(a.g2, b.g2);
  double im = re_line(a.g1, b.g2) - re_line(a.g2, b.g1);
  return {re, im};
}

double weight_at(const ExpSum& g, double t) { return t > 0 ? 0.0 : eval_real(g, -t); }

Mat subsystem_covariance(const OscState& osc, const FieldKernel& k, const ModeWeight& m) {
  Weights wx{m.g1, scaled(m.g2, -1.0)};
  Weights wy{m.g2, m.g1};
  Mat v = Mat::Zero(4, 4);
  v.topLeftCorner(2, 2) = osc.a_block;
  for (int i = 0; i < 2; ++i) {
    v(i, 2) = v(2, i) = osc_field(osc, i, wx);
    v(i, 3) = v(3, i) = osc_field(osc, i, wy);
  }
  v(2, 2) = field_field(k, wx, wx);
  v(3, 3) = field_field(k, wy, wy);
  v(2, 3) = v(3, 2) = field_field(k, wx, wy);
  return v;
}

Mat subsystem_covariance(const SystemParams& p, const ModeWeight& m) {
  validate_params(p);
  Q4 q = q_subsystem(p, m);
  Mat v(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) v(i, j) = static_cast<double>(q[i][j]);
  return v;
}

double mode_min_symplectic(const SystemParams& p, const ModeWeight& m) {
  return q_min_symplectic(q_subsystem(p, m));
}

double mode_negativity(const SystemParams& p, const ModeWeight& m) {
  return std::max(0.0, -std::log(mode_min_symplectic(p, m)));
}

SubNegativity sub_negativity(const Mat& v4) {
  require_covariance(v4);
  if (v4.rows() != 4) throw StructuralError("sub_negativity needs a 4x4 matrix");
  SubNegativity r;
  r.nu_min = two_mode_min_symplectic(v4);
  EntanglementResult g = log_negativity(v4, {0});
  r.nu_general = g.lambda_min;
  r.e_n = std::max(0.0, -std::log(r.nu_min));
  return r;
}

double omega_g_fit(const SystemParams& p) {
  double f = std::sqrt(0.64 * p.omega_f * p.omega_f + 0.57 * p.omega_q * p.omega_q);
  return std::max(f, 1.01 * p.omega_m);
}

ModeOptimum optimize_mode(const SystemParams& p, const ModeOptions& opt) {
  validate_params(p);
  if (p.omega_q == 0) {
    ModeOptimum r;
    r.mode = make_mode(p, p.omega_m, kPi / 4);
    r.note = "omega_q = 0: oscillator and field are uncoupled";
    return r;
  }
  return optimize_family(
      p, opt, [&](double gg, double z) { return make_mode_from_gamma(p, gg, z); },
      [&](const ModeWeight& m) { return mode_min_symplectic(p, m); });
}

std::vector<ScanPoint> mode_scan(const SystemParams& p, const std::vector<double>& omega_g,
                                 double zeta) {
  validate_params(p);
  std::vector<ScanPoint> out;
  out.reserve(omega_g.size());
  for (double w : omega_g) out.push_back({w, mode_negativity(p, make_mode(p, w, zeta))});
  return out;
}

ModeOptimum next_order_mode(const SystemParams& p, const std::vector<ModeWeight>& previous,
                            const ModeOptions& opt) {
  validate_params(p);
  for (size_t a = 0; a < previous.size(); ++a)
    for (size_t b = 0; b <= a; ++b) {
      cplx o = mode_overlap(previous[a], previous[b]);
      if (std::abs(o - (a == b ? 1.0 : 0.0)) > 1e-8)
        throw StructuralError("next_order_mode: previous modes are not orthonormal");
    }
  auto project = [&](double gg, double z) {
    ModeWeight m = make_mode_from_gamma(p, gg, z);
    m.deflate = previous;
    QMode f = q_mode(p, m);
    m.g1 = round_sum(f.g1);
    m.g2 = round_sum(f.g2);
    m.parametric = previous.empty();
    return m;
  };
  ModeOptimum r = optimize_family(p, opt, project, [&](const ModeWeight& m) { return mode_min_symplectic(p, m); });
  bool any_feasible = false;
  for (const auto& s : r.starts) {
    try {
      ModeWeight m = project(s.gamma_end, s.zeta_end);
      if (r.e_n_sub == 0 && !any_feasible) r.mode = m;
      any_feasible = true;
    } catch (const DegeneracyError&) {
    }
  }
  if (!any_feasible) throw DegeneracyError("next_order_mode: feasible set is numerically empty");
  return r;
}

std::vector<LoSample> lo_waveform(const ModeWeight& m, double zeta_q,
                                  const std::vector<double>& times) {
  if (!(zeta_q >= 0 && zeta_q < 2 * kPi)) throw DomainError("quadrature angle must lie in [0, 2 pi)");
  double c = std::cos(zeta_q), s = std::sin(zeta_q);
  std::vector<LoSample> out;
  out.reserve(times.size());
  for (double t : times) {
    double g1 = weight_at(m.g1, t), g2 = weight_at(m.g2, t);
    out.push_back({t, g1 * s + g2 * c, g2 * s - g1 * c});
  }
  return out;
}

}  // namespace cve
