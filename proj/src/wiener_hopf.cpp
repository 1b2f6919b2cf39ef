#include "cve/wiener_hopf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cve/errors.hpp"

#include <boost/multiprecision/complex128.hpp>

namespace cve {

namespace {
const cplx I(0, 1);
}

cplx d_factor(const SystemParams& p, cplx w) {
  return p.omega_m * p.omega_m - w * w - 2.0 * I * p.gamma_m * w;
}

cplx d_bar_factor(const SystemParams& p, cplx w) {
  return p.omega_m * p.omega_m - w * w + 2.0 * I * p.gamma_m * w;
}

cplx SpectralSymbol::numerator(cplx w) const {
  cplx acc = 0;
  for (double c : quartic) acc = acc * w + c;
  return acc;
}

cplx SpectralSymbol::denominator(cplx w) const {
  return d_factor(params, w) * d_bar_factor(params, w);
}

SpectralSymbol symbol_polynomial(const SystemParams& p, double lambda) {
  if (!(lambda > 0 && lambda < 1)) throw DomainError("symbol_polynomial: lambda must be in (0, 1)");
  SpectralSymbol s;
  s.params = p;
  s.lambda = lambda;
  double L = 1.0 - lambda * lambda, g = p.gamma_m, wm2 = p.omega_m * p.omega_m;
  double ke = p.kappa() * p.eta(), k2sf = p.kappa() * p.kappa() * p.s_f();
  // |D|^2 = Omega^4 + (4 g^2 - 2 wm^2) Omega^2 + wm^4
  s.quartic = {L, 0.0, L * (4 * g * g - 2 * wm2), -4.0 * lambda * ke * g, L * wm2 * wm2 + k2sf};
  return s;
}

cplx symbol_direct(const SystemParams& p, double lambda, double w) {
  cplx G = 1.0 / d_factor(p, w);
  double L = 1.0 - lambda * lambda;
  return L + I * lambda * p.kappa() * p.eta() * (G - std::conj(G)) +
         p.kappa() * p.kappa() * p.s_f() * std::norm(G);
}

std::array<cplx, 4> quartic_roots(const std::array<double, 5>& c) {
  if (c[0] == 0.0) throw DegeneracyError("quartic leading coefficient vanishes");
  Eigen::Matrix4d comp = Eigen::Matrix4d::Zero();
  for (int k = 0; k < 4; ++k) comp(0, k) = -c[k + 1] / c[0];
  for (int k = 1; k < 4; ++k) comp(k, k - 1) = 1.0;
  Eigen::EigenSolver<Eigen::Matrix4d> es(comp, false);
  std::array<cplx, 4> r;
  for (int k = 0; k < 4; ++k) {
    cplx z = es.eigenvalues()[k];
    // Newton polish on the original polynomial
    for (int it = 0; it < 3; ++it) {
      cplx f = 0, df = 0;
      for (double a : c) {
        df = df * z + f;
        f = f * z + a;
      }
      if (std::abs(df) == 0.0) break;
      cplx step = f / df;
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) break;
      z -= step;
    }
    r[k] = z;
  }
  return r;
}

cplx Factorization::psi_plus(cplx w) const {
  return scale * (w - lower[0]) * (w - lower[1]) / d_factor(params, w);
}

cplx Factorization::psi_minus(cplx w) const {
  return scale * (w - upper[0]) * (w - upper[1]) / d_bar_factor(params, w);
}

Rational Factorization::inv_psi_minus() const {
  Rational r;
  r.constant = -1.0 / scale;
  for (int k = 0; k < 2; ++k) {
    cplx z = upper[k], o = upper[1 - k];
    r.terms.push_back({d_bar_factor(params, z) / (scale * (z - o)), z});
  }
  return r;
}

Factorization factorize(const SpectralSymbol& s) {
  auto roots = quartic_roots(s.quartic);
  double scale = 0;
  for (auto z : roots) scale = std::max(scale, std::abs(z));
  Factorization f;
  f.params = s.params;
  f.scale = std::sqrt(s.quartic[0]);
  int nl = 0, nu = 0;
  for (auto z : roots) {
    if (std::abs(z.imag()) < 1e-9 * std::max(scale, 1e-300))
      throw DegeneracyError("spectral symbol has a real root");
    if (z.imag() < 0) {
      if (nl < 2) f.lower[nl] = z;
      ++nl;
    } else {
      if (nu < 2) f.upper[nu] = z;
      ++nu;
    }
  }
  if (nl != 2 || nu != 2) throw DegeneracyError("unbalanced root split");
  // real coefficients: the upper roots are the conjugates of the lower ones
  f.upper = {std::conj(f.lower[0]), std::conj(f.lower[1])};
  return f;
}

namespace {

// The determinant cancels ~10 digits between the oscillator block and the
// residue sums, so it is evaluated in quad precision.
using qreal = boost::multiprecision::float128;
using qcplx = boost::multiprecision::complex128;

struct QTerm {
  qcplx res, pole;
};

struct QRat {
  qcplx c = 0;
  std::vector<QTerm> t;
};

qcplx q(cplx z) { return qcplx(qreal(z.real()), qreal(z.imag())); }

QRat qtransform(const ExpSum& f, qreal sign) {
  QRat r;
  const qcplx iq(0, 1);
  for (const auto& e : f) r.t.push_back({iq * q(e.amp) * sign, iq * q(e.rate)});
  return r;
}

QRat qconj(const QRat& f) {
  QRat r;
  r.c = conj(f.c);
  for (const auto& e : f.t) r.t.push_back({conj(e.res), conj(e.pole)});
  return r;
}

QRat qadd(const QRat& a, const QRat& b) {
  QRat r = a;
  r.c += b.c;
  r.t.insert(r.t.end(), b.t.begin(), b.t.end());
  return r;
}

QRat qscale(const QRat& a, const qcplx& k) {
  QRat r = a;
  r.c *= k;
  for (auto& e : r.t) e.res *= k;
  return r;
}

QRat qmul(const QRat& a, const QRat& b) {
  QRat r;
  r.c = a.c * b.c;
  for (const auto& x : a.t)
    for (const auto& y : b.t) {
      qcplx k = x.res * y.res / (x.pole - y.pole);
      r.t.push_back({k, x.pole});
      r.t.push_back({-k, y.pole});
    }
  for (const auto& y : b.t) r.t.push_back({a.c * y.res, y.pole});
  for (const auto& x : a.t) r.t.push_back({b.c * x.res, x.pole});
  return r;
}

QRat qcausal(const QRat& f) {
  QRat r;
  for (const auto& e : f.t)
    if (e.pole.imag() < 0) r.t.push_back(e);
  return r;
}

qcplx qinner(const QRat& f, const QRat& h) {
  const qcplx iq(0, 1);
  qcplx acc = 0;
  for (const auto& a : f.t)
    for (const auto& b : h.t) acc += conj(a.res) * b.res / (iq * (b.pole - conj(a.pole)));
  return acc;
}

// Lower-half-plane roots of the symbol numerator, polished in quad precision.
std::array<qcplx, 2> q_lower_roots(const SystemParams& p, double lambda) {
  SpectralSymbol sym = symbol_polynomial(p, lambda);
  Factorization fac = factorize(sym);
  double sep = std::abs(fac.lower[0] - fac.lower[1]);
  if (sep < 1e-7 * std::max(std::abs(fac.lower[0]), 1.0))
    throw DegeneracyError("near-degenerate symbol roots");
  qreal lam = lambda, L = 1 - lam * lam, g = p.gamma_m, wm2 = qreal(p.omega_m) * p.omega_m;
  qreal ke = qreal(p.kappa()) * p.eta(), k2sf = qreal(p.kappa()) * p.kappa() * p.s_f();
  std::array<qreal, 5> c = {L, 0, L * (4 * g * g - 2 * wm2), -4 * lam * ke * g, L * wm2 * wm2 + k2sf};
  std::array<qcplx, 2> out;
  for (int k = 0; k < 2; ++k) {
    qcplx z = q(fac.lower[k]);
    for (int it = 0; it < 4; ++it) {
      qcplx f = 0, df = 0;
      for (const auto& a : c) {
        df = df * z + f;
        f = f * z + a;
      }
      z -= f / df;
    }
    out[k] = z;
  }
  return out;
}

double q_characteristic_det(const SystemParams& p, const OscState& osc, double lambda) {
  std::array<qcplx, 2> lower;
  try {
    lower = q_lower_roots(p, lambda);
  } catch (const DegeneracyError&) {
    double l2 = lambda + 1e-9 < 1.0 ? lambda + 1e-9 : lambda - 1e-9;
    lower = q_lower_roots(p, l2);
  }
  const qcplx iq(0, 1);
  qreal lam = lambda, L = 1 - lam * lam, g = p.gamma_m, wm2 = qreal(p.omega_m) * p.omega_m;
  qreal sL = sqrt(L);
  auto dbar = [&](const qcplx& w) { return qcplx(wm2) - w * w + qcplx(2) * iq * qcplx(g) * w; };
  QRat ipsi;
  ipsi.c = qcplx(-1 / sL);
  std::array<qcplx, 2> up = {conj(lower[0]), conj(lower[1])};
  for (int k = 0; k < 2; ++k) ipsi.t.push_back({dbar(up[k]) / (qcplx(sL) * (up[k] - up[1 - k])), up[k]});
  // Green's function in quad precision
  qreal w = sqrt(wm2 - g * g);
  qcplx rp(-g, w), rm(-g, -w);
  qcplx cg = qcplx(1) / (qcplx(0, 2) * qcplx(w));
  QRat G;
  G.t = {{iq * cg, iq * rp}, {-iq * cg, iq * rm}};
  QRat gconj = qconj(G);
  qreal ke = qreal(p.kappa()) * p.eta();
  std::array<QRat, 2> f1, f2, u;
  for (int i = 0; i < 2; ++i) {
    qreal sgn = i == 0 ? 1 : -1;  // oscillator partial transpose: p -> -p
    f1[i] = qtransform(osc.cross[i][0], sgn);
    f2[i] = qtransform(osc.cross[i][1], sgn);
  }
  for (int j = 0; j < 2; ++j) {
    QRat h = qadd(qadd(qcausal(qscale(qmul(gconj, f1[j]), qcplx(ke))), qscale(f1[j], -iq * qcplx(lam))),
                  qscale(f2[j], qcplx(-1)));
    u[j] = qcausal(qmul(h, ipsi));
  }
  qcplx M[2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      qreal a = osc.a_block(i, j);
      if (i != j) a = -a;
      M[i][j] = qcplx(a) - qinner(f1[i], f1[j]) - qinner(u[i], u[j]);
    }
  M[0][1] += iq * qcplx(lam);
  M[1][0] -= iq * qcplx(lam);
  qcplx d = M[0][0] * M[1][1] - M[0][1] * M[1][0];
  return static_cast<double>(d.real());
}

}  // namespace

double characteristic_det(const SystemParams& p, const OscState& osc, double lambda) {
  return q_characteristic_det(p, osc, lambda);
}

double characteristic_det(const SystemParams& p, double lambda) {
  return characteristic_det(p, steady_state(p), lambda);
}

std::vector<double> bracket_roots(const SystemParams& p, const OscState& osc,
                                  const WienerHopfOptions& opt, int* skipped) {
  std::vector<double> grid;
  int n = opt.scan_points;
  double mid = 0.5;
  for (int k = 0; k < n; ++k)
    grid.push_back(opt.lo * std::pow(mid / opt.lo, static_cast<double>(k) / (n - 1)));
  double top = 1.0 - opt.hi;
  for (int k = n - 2; k >= 0; --k)
    grid.push_back(1.0 - top * std::pow(mid / top, static_cast<double>(k) / (n - 1)));
  auto f = [&](double l) -> double {
    try {
      return characteristic_det(p, osc, l);
    } catch (const DegeneracyError&) {
      return std::nan("");
    }
  };
  std::vector<double> vals(grid.size());
  int nskip = 0;
  for (size_t i = 0; i < grid.size(); ++i) {
    vals[i] = f(grid[i]);
    if (!std::isfinite(vals[i])) ++nskip;
  }
  if (skipped) *skipped = nskip;
  std::vector<double> roots;
  for (size_t i = 0; i + 1 < grid.size(); ++i) {
    double va = vals[i], vb = vals[i + 1];
    if (!std::isfinite(va) || !std::isfinite(vb)) continue;
    if ((va < 0) == (vb < 0)) continue;
    double a = grid[i], b = grid[i + 1];
    while (b - a > opt.xtol) {
      double m = 0.5 * (a + b), vm = f(m);
      if (!std::isfinite(vm)) break;
      if ((vm < 0) == (va < 0)) {
        a = m;
        va = vm;
      } else {
        b = m;
      }
    }
    roots.push_back(0.5 * (a + b));
  }
  return roots;
}

EntanglementResult solve_lambda(const SystemParams& p, const OscState& osc,
                                const WienerHopfOptions& opt) {
  validate_params(p);
  EntanglementResult r;
  r.info.method = "wiener-hopf";
  if (p.omega_q == 0.0) {
    r.info.note = "omega_q = 0: no coupling, separable";
    return r;
  }
  int skipped = 0;
  auto roots = bracket_roots(p, osc, opt, &skipped);
  std::ostringstream os;
  os.precision(12);
  os << "scan_points=" << 2 * opt.scan_points - 1 << " skipped=" << skipped << " roots=";
  for (double x : roots) os << x << ' ';
  r.info.note = os.str();
  r.below_unity_count = static_cast<int>(roots.size());
  r.symplectic_spectrum = roots;
  if (roots.empty()) {
    r.info.note += "(no sign change: not entangled)";
    return r;
  }
  if (roots.size() > 1 && !opt.allow_multiple)
    throw AmbiguityError("characteristic determinant has several roots in (0,1): " + r.info.note);
  r.lambda_min = *std::min_element(roots.begin(), roots.end());
  double acc = 0;
  for (double x : roots) acc -= std::log(x);
  r.e_n = acc;
  r.info.iterations = static_cast<int>(std::ceil(std::log2((1.0) / opt.xtol)));
  return r;
}

EntanglementResult solve_lambda(const SystemParams& p, const WienerHopfOptions& opt) {
  return solve_lambda(p, steady_state(p), opt);
}

}  // namespace cve
