#include "cve/grid.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cve/errors.hpp"

namespace cve {

namespace {

constexpr double kPi = std::numbers::pi;

cplx basis_moment(const BasisFunction& f, cplx mu) {
  // int_0^len phi(start + u) e^{mu u} du
  cplx acc = 0;
  for (const auto& t : f.terms) acc += t.amp * window_integral(t.rate + mu, f.len);
  return acc;
}

bool same_window(const BasisFunction& a, const BasisFunction& b) {
  return a.start == b.start && a.len == b.len;
}

// Adds int int phi_i(s) phi_j(s') K(s, s') to M(i, j), where
// K = amp e^{rate (s - s')} for s > s' (causal) or amp e^{rate (s' - s)} for s < s'.
void add_kernel(Mat& M, const std::vector<BasisFunction>& basis, const ExpSum& kern, bool causal) {
  const int n = static_cast<int>(basis.size());
  for (const auto& term : kern) {
    cplx rho = term.rate, A = term.amp;
    std::vector<cplx> up(n), um(n);
    for (int i = 0; i < n; ++i) {
      up[i] = basis_moment(basis[i], rho) * std::exp(rho * basis[i].start);
      um[i] = basis_moment(basis[i], -rho) * std::exp(-rho * basis[i].start);
    }
    for (int j = 0; j < n; ++j) {
      const double endj = basis[j].start + basis[j].len;
      for (int i = 0; i < n; ++i) {
        const double endi = basis[i].start + basis[i].len;
        if (causal) {
          if (basis[i].start >= endj - 1e-12 * endj) M(i, j) += (A * up[i] * um[j]).real();
        } else {
          if (basis[j].start >= endi - 1e-12 * endi) M(i, j) += (A * um[i] * up[j]).real();
        }
      }
    }
    // pairs inside one window
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (!same_window(basis[i], basis[j])) continue;
        cplx acc = 0;
        const auto& fi = basis[i];
        const auto& fj = basis[j];
        for (const auto& ti : fi.terms)
          for (const auto& tj : fj.terms) {
            cplx ci = ti.amp, cj = tj.amp;
            cplx ni = ti.rate, nj = tj.rate;
            if (causal)
              acc += ci * cj * triangle_integral(ni + rho, nj - rho, fi.len);
            else
              acc += ci * cj * triangle_integral(nj + rho, ni - rho, fi.len);
          }
        M(i, j) += (A * acc).real();
      }
    }
  }
}

}  // namespace

GridSpec grid_level(const SystemParams& p, int level) {
  GridSpec g;
  double inv_gamma = 1.0 / p.gamma_m;
  g.horizon = std::max(4.0 * inv_gamma, 50.0 / p.omega_m);
  g.dt = 0.1 / std::pow(2.0, level) / p.omega_m;
  g.near_span = std::min(g.horizon, 10.0 / p.omega_m);
  return g;
}

GridSpec tophat_grid(double horizon, double dt) {
  GridSpec g;
  g.horizon = horizon;
  g.near_span = horizon;
  g.dt = dt;
  return g;
}

void validate_grid(const SystemParams& p, const GridSpec& g) {
  if (!(g.horizon > 0)) throw ConfigError("grid horizon must be positive");
  if (!(g.dt > 0) || g.dt * p.omega_m > 0.1 + 1e-12) throw ConfigError("grid needs dt*omega_m <= 0.1");
  if (g.near_span < 0 || g.near_span > g.horizon + 1e-9) throw ConfigError("near span outside horizon");
  if (g.near_span < g.horizon && (g.envelope_order < 1 || !(g.growth > 0)))
    throw ConfigError("bad far-zone window parameters");
}

std::vector<BasisFunction> make_basis(const SystemParams& p, const GridSpec& g) {
  validate_grid(p, g);
  std::vector<BasisFunction> out;
  int nbins = static_cast<int>(std::ceil(g.near_span / g.dt - 1e-9));
  for (int k = 0; k < nbins; ++k) {
    BasisFunction f;
    f.start = k * g.dt;
    f.len = g.dt;
    f.terms = {{1.0 / std::sqrt(g.dt), 0.0}};
    out.push_back(f);
  }
  double s = nbins * g.dt;
  const double w = p.omega_tilde();
  const int K = g.envelope_order;
  while (s < g.horizon - 1e-9) {
    double len = std::min(std::max(g.growth * s, 2.0 * kPi / w), g.horizon - s);
    if (g.horizon - s - len < 0.5 * len) len = g.horizon - s;
    // raw functions e^{c u} cos(w u), e^{c u} sin(w u)
    std::vector<ExpSum> raw;
    for (int d = 0; d < K; ++d) {
      double c = (d - 0.5 * (K - 1)) / len;
      raw.push_back({{0.5, cplx(c, w)}, {0.5, cplx(c, -w)}});
      raw.push_back({{1.0 / cplx(0, 2.0), cplx(c, w)}, {-1.0 / cplx(0, 2.0), cplx(c, -w)}});
    }
    const int r = static_cast<int>(raw.size());
    Mat gram(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b <= a; ++b) {
        cplx acc = 0;
        for (const auto& ta : raw[a])
          for (const auto& tb : raw[b]) acc += ta.amp * tb.amp * window_integral(ta.rate + tb.rate, len);
        gram(a, b) = gram(b, a) = acc.real();
      }
    Eigen::SelfAdjointEigenSolver<Mat> es(gram);
    const double top = es.eigenvalues().maxCoeff();
    for (int k = r - 1; k >= 0; --k) {
      double ev = es.eigenvalues()(k);
      if (ev < 1e-11 * top) continue;
      BasisFunction f;
      f.start = s;
      f.len = len;
      for (int a = 0; a < r; ++a) {
        double c = es.eigenvectors()(a, k) / std::sqrt(ev);
        // cos and sin partners share rates: raw[2d] and raw[2d + 1]
        for (size_t t = 0; t < raw[a].size(); ++t) {
          size_t slot = 2 * (a / 2) + t;
          if (f.terms.size() <= slot) f.terms.resize(slot + 1, {0.0, raw[a][t].rate});
          f.terms[slot].amp += c * raw[a][t].amp;
        }
      }
      out.push_back(f);
    }
    s += len;
  }
  return out;
}

Mat build_grid_covariance(const OscState& osc, const FieldKernel& k,
                          const std::vector<BasisFunction>& basis) {
  const int n = static_cast<int>(basis.size());
  Mat V = Mat::Zero(2 + 2 * n, 2 + 2 * n);
  V.topLeftCorner(2, 2) = osc.a_block;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int f = 0; f < n; ++f) {
        cplx acc = 0;
        for (const auto& t : osc.cross[i][j])
          acc += t.amp * std::exp(t.rate * basis[f].start) * basis_moment(basis[f], t.rate);
        V(i, 2 + 2 * f + j) = V(2 + 2 * f + j, i) = acc.real();
      }
  Mat b12 = Mat::Zero(n, n), b22 = Mat::Zero(n, n);
  add_kernel(b12, basis, k.b12, true);
  add_kernel(b22, basis, k.b22, true);
  add_kernel(b22, basis, k.b22, false);
  b22 = 0.5 * (b22 + b22.transpose()).eval();
  for (int a = 0; a < n; ++a) {
    V(2 + 2 * a, 2 + 2 * a) = k.delta_coeff(0, 0);
    V(3 + 2 * a, 3 + 2 * a) = k.delta_coeff(1, 1) + b22(a, a);
    for (int b = 0; b < n; ++b) {
      V(2 + 2 * a, 3 + 2 * b) = b12(a, b);
      V(3 + 2 * b, 2 + 2 * a) = b12(a, b);
      if (a != b) V(3 + 2 * a, 3 + 2 * b) = b22(a, b);
    }
  }
  return V;
}

Mat build_grid_covariance(const SystemParams& p, const GridSpec& g) {
  return build_grid_covariance(steady_state(p), field_kernel(p), make_basis(p, g));
}

double below_unity_tol(double margin) {
  // nearly pure field bins sit at the unresolved distance |margin| from unity
  return std::max({1e-6, 1.5 * std::max(0.0, -margin), 1.5 * std::min(1e-4, std::abs(margin))});
}

EntanglementResult grid_negativity(const Mat& V, double physicality_tol) {
  Physicality phys = check_physicality(V, physicality_tol);
  NegativityOptions opt;
  opt.below_tol = below_unity_tol(phys.margin);
  EntanglementResult r = log_negativity(V, {0}, opt);
  std::ostringstream os;
  os.precision(6);
  os << "physicality_margin=" << phys.margin << " below_tol=" << opt.below_tol;
  if (!phys.ok) os << " (untransposed state outside physicality tolerance)";
  r.info.note = os.str();
  return r;
}

EntanglementResult entanglement_grid(const SystemParams& p, const GridPolicy& policy) {
  validate_params(p);
  return entanglement_grid(p, steady_state(p), policy);
}

EntanglementResult entanglement_grid(const SystemParams& p, const OscState& osc,
                                     const GridPolicy& policy) {
  FieldKernel k = field_kernel(p);
  EntanglementResult last;
  std::vector<double> raw;
  for (int level = 0; level < policy.max_levels; ++level) {
    GridSpec g = grid_level(p, level);
    auto basis = make_basis(p, g);
    if (static_cast<int>(basis.size()) > policy.max_functions) {
      if (level == 0)
        throw ConfigError("grid would need " + std::to_string(basis.size()) +
                          " modes; use the wiener-hopf method");
      break;
    }
    Mat V = build_grid_covariance(osc, k, basis);
    EntanglementResult r = grid_negativity(V, policy.physicality_tol);
    raw.push_back(r.e_n);
    r.info.trace = raw;
    r.info.iterations = level + 1;
    r.info.method = "grid/" + r.info.method + " N=" + std::to_string(basis.size());
    last = r;
    if (raw.size() >= 2) {
      // the bin error is O(dt^2): halving dt leaves a correction of (E1 - E0)/3
      const size_t m = raw.size();
      double e0 = raw[m - 2], e1 = raw[m - 1];
      double corr = (e1 - e0) / 3.0;
      if (e0 == 0 && e1 == 0) {
        last.info.converged = true;
        return last;
      }
      bool settled = std::abs(corr) < policy.tol;
      if (!settled && m >= 3) {
        double prev = raw[m - 2] + (raw[m - 2] - raw[m - 3]) / 3.0;
        settled = std::abs(e1 + corr - prev) < policy.tol;
      }
      if (settled && e0 > 0 && e1 > 0) {
        last.e_n = e1 + corr;
        last.info.converged = true;
        last.info.note += " extrapolated_from=" + std::to_string(e1);
        return last;
      }
    }
  }
  last.info.converged = false;
  std::ostringstream os;
  os << "grid refinement did not converge; E_N per level:";
  for (double t : raw) os << ' ' << t;
  throw ConvergenceError(os.str());
}

}  // namespace cve
