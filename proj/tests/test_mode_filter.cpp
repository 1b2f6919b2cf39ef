#include <doctest.h>

#include <cmath>
#include <random>

#include "cve/errors.hpp"
#include "cve/grid.hpp"
#include "cve/mode_filter.hpp"
#include "cve/wiener_hopf.hpp"
#include "quad.hpp"
#include "random_states.hpp"

using namespace cve;

namespace {

constexpr double kPi = 3.14159265358979323846;

SystemParams weak_coupling() { return build_params(1.0, 1e3, 0.02, 0.02, std::nullopt); }

double quad_norm(const ModeWeight& m) {
  double tail = 40.0 / std::max(m.gamma_g, 1e-3);
  auto f = [&](double s) {
    double a = eval_real(m.g1, s), b = eval_real(m.g2, s);
    return a * a + b * b;
  };
  double acc = 0, step = 2 * kPi / m.omega_g * 50;
  for (double lo = 0; lo < tail; lo += step) acc += testq::integrate(f, lo, std::min(lo + step, tail), 1e-13);
  return acc;
}

// int over one basis function of phi(s) g(s)
double project(const BasisFunction& f, const ExpSum& g) {
  cplx acc = 0;
  for (const auto& a : f.terms)
    for (const auto& b : g) acc += a.amp * b.amp * std::exp(b.rate * f.start) * window_integral(a.rate + b.rate, f.len);
  return acc.real();
}

}  // namespace

TEST_CASE("constraint and amplitudes") {
  SystemParams p = weak_coupling();
  ModeWeight m = make_mode(p, p.omega_m, kPi / 4);
  CHECK(m.gamma_g == doctest::Approx(p.gamma_m).epsilon(1e-9));
  CHECK(m.a_1 == doctest::Approx(std::sqrt(2 * p.gamma_m)).epsilon(1e-3));
  CHECK(m.a_2 == doctest::Approx(std::sqrt(2 * p.gamma_m)).epsilon(1e-3));
  CHECK(m.theta_1 == doctest::Approx(-kPi / 2));
  CHECK(m.theta_2 == 0.0);
  CHECK(omega_g_floor(p) == doctest::Approx(p.omega_tilde()));
  CHECK(std::abs(gamma_g_from_omega(p, omega_g_floor(p))) < 1e-7);
  CHECK(omega_g_from_gamma(p, gamma_g_from_omega(p, 1.3)) == doctest::Approx(1.3).epsilon(1e-14));
  CHECK_THROWS_AS(make_mode(p, 0.9, kPi / 4), DomainError);
  CHECK_THROWS_AS(make_mode(p, p.omega_tilde() * (1 - 1e-9), kPi / 4), DomainError);
  CHECK_THROWS_AS(make_mode_from_gamma(p, 1e-3, kPi / 2), DomainError);
  // the weak-limit optimum sits at gamma_g ~ 2 gamma_m, where A ~ 2 sqrt(gamma_m)
  ModeWeight o = make_mode_from_gamma(p, 2.04 * p.gamma_m, kPi / 4);
  CHECK(o.omega_g == doctest::Approx(p.omega_m).epsilon(1e-5));
  CHECK(o.a_1 == doctest::Approx(2 * std::sqrt(p.gamma_m)).epsilon(0.02));
  CHECK(o.a_2 == doctest::Approx(2 * std::sqrt(p.gamma_m)).epsilon(0.02));
}

TEST_CASE("normalization and commutator") {
  SystemParams p = build_params(1.0, 200, 0.3, 0.2, std::nullopt);
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> lg(-4.0, 0.5), z(0.0, 1.5);
  for (int k = 0; k < 20; ++k) {
    ModeWeight m = make_mode_from_gamma(p, std::pow(10.0, lg(rng)), z(rng));
    // [X, Y] = 2i (f|f)
    CHECK(std::abs(mode_norm(m) - 1.0) <= 1e-10);
    if (m.gamma_g > 0.02) CHECK(quad_norm(m) == doctest::Approx(1.0).epsilon(1e-9));
    double s = 0.37;
    CHECK(weight_at(m.g1, -s) == doctest::Approx(-m.a_1 * std::exp(-m.gamma_g * s) * std::sin(m.omega_g * s)));
    CHECK(weight_at(m.g2, -s) == doctest::Approx(m.a_2 * std::exp(-m.gamma_g * s) * std::cos(m.omega_g * s)));
    CHECK(weight_at(m.g1, 0.5) == 0.0);
  }
  ModeWeight m = make_mode(p, 1.2, 0.4);
  CHECK(quad_norm(m) == doctest::Approx(1.0).epsilon(1e-10));
  double a1 = mode_amplitude_sq(m.gamma_g, m.omega_g, m.theta_1, std::sin(m.zeta) * std::sin(m.zeta));
  CHECK(a1 == doctest::Approx(m.a_1 * m.a_1).epsilon(1e-12));
}

TEST_CASE("uncoupled subsystem") {
  SystemParams p = build_params(1.0, 200, 0.0, std::nullopt, 2.0);
  Mat v = subsystem_covariance(p, make_mode(p, 1.1, 0.7));
  Mat want = Mat::Identity(4, 4);
  want(0, 0) = want(1, 1) = 5.0;
  CHECK((v - want).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(sub_negativity(v).e_n == 0.0);
  CHECK(sub_negativity(Mat::Identity(4, 4)).e_n == 0.0);
  auto o = optimize_mode(p);
  CHECK(o.e_n_sub == 0.0);
}

TEST_CASE("double and quad assembly agree at weak coupling") {
  SystemParams p = build_params(1.0, 200, 0.3, 0.2, std::nullopt);
  ModeWeight m = make_mode(p, 1.05, 0.8);
  Mat a = subsystem_covariance(p, m), b = subsystem_covariance(steady_state(p), field_kernel(p), m);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9 * a.cwiseAbs().maxCoeff());
  auto s = sub_negativity(a);
  CHECK(s.nu_min == doctest::Approx(s.nu_general).epsilon(1e-10));
  CHECK(s.nu_min == doctest::Approx(two_mode_min_symplectic(a)).epsilon(1e-10));
  CHECK(log_negativity(a, {1}).e_n == doctest::Approx(s.e_n).epsilon(1e-10).scale(1e-10));
  CHECK(mode_min_symplectic(p, m) == doctest::Approx(s.nu_min).epsilon(1e-8));
}

TEST_CASE("filtered mode on the grid basis") {
  SystemParams p = weak_coupling();
  ModeWeight m = make_mode(p, p.omega_m, kPi / 4);
  GridSpec g = grid_level(p, 2);
  g.horizon = 16.0 / p.gamma_m;
  auto basis = make_basis(p, g);
  Mat v = build_grid_covariance(steady_state(p), field_kernel(p), basis);
  const int n = static_cast<int>(basis.size());
  Mat t = Mat::Zero(4, 2 + 2 * n);
  t(0, 0) = t(1, 1) = 1.0;
  for (int f = 0; f < n; ++f) {
    double c1 = project(basis[f], m.g1), c2 = project(basis[f], m.g2);
    t(2, 2 + 2 * f) = c1;
    t(2, 3 + 2 * f) = -c2;
    t(3, 2 + 2 * f) = c2;
    t(3, 3 + 2 * f) = c1;
  }
  CHECK(t.row(2).squaredNorm() == doctest::Approx(1.0).epsilon(1e-4));
  Mat v4 = t * v * t.transpose();
  v4 = 0.5 * (v4 + v4.transpose()).eval();
  double grid = sub_negativity(v4).e_n;
  double closed = mode_negativity(p, m);
  CHECK(closed > 0);
  CHECK(grid == doctest::Approx(closed).epsilon(1e-3).scale(1.0));
  CHECK(sub_negativity(subsystem_covariance(p, m)).e_n == doctest::Approx(closed).epsilon(1e-8));
}

TEST_CASE("filtered entanglement never exceeds the full value") {
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> lg(-1.0, 1.5), z(0.0, 1.5);
  for (auto [oq, of] : {std::pair{0.02, 0.02}, std::pair{0.1, 0.05}, std::pair{0.3, 0.1}}) {
    SystemParams p = build_params(1.0, 1e3, oq, of, std::nullopt);
    double full = solve_lambda(p).e_n;
    for (int k = 0; k < 15; ++k) {
      ModeWeight m = make_mode_from_gamma(p, p.gamma_m * std::pow(10.0, lg(rng)), z(rng));
      CHECK(mode_negativity(p, m) <= full + 1e-3);
    }
  }
}

TEST_CASE("local operations on the mode leave E_sub unchanged") {
  SystemParams p = build_params(1.0, 1e3, 0.1, 0.05, std::nullopt);
  Mat v = subsystem_covariance(p, make_mode_from_gamma(p, 2 * p.gamma_m, 0.6));
  double e = sub_negativity(v).e_n;
  std::mt19937_64 rng(53);
  for (int k = 0; k < 20; ++k) {
    Mat s = Mat::Identity(4, 4);
    s.block<2, 2>(2, 2) = testr::local_symplectic(rng);
    Mat w = s * v * s.transpose();
    w = 0.5 * (w + w.transpose()).eval();
    CHECK(sub_negativity(w).e_n == doctest::Approx(e).epsilon(1e-8));
  }
}

TEST_CASE("optimizer") {
  SystemParams p = weak_coupling();
  ModeOptions o;
  auto a = optimize_mode(p, o);
  o.reverse_starts = true;
  auto b = optimize_mode(p, o);
  CHECK(a.starts.size() == 4);
  CHECK(a.e_n_sub == doctest::Approx(b.e_n_sub).epsilon(1e-4).scale(1.0));
  CHECK(a.e_n_sub == doctest::Approx(mode_negativity(p, a.mode)).epsilon(1e-12));
  CHECK(a.e_n_sub <= solve_lambda(p).e_n + 1e-3);
  CHECK(omega_g_fit(p) >= 1.01 * p.omega_m);
}

TEST_CASE("scan peaks at omega_m in the weak limit") {
  SystemParams p = weak_coupling();
  std::vector<double> w = {1.0 + 1e-5, 1.0 + 1e-3, 1.0 + 1e-2, 1.1, 1.5, 2.0};
  auto pts = mode_scan(p, w, kPi / 4);
  REQUIRE(pts.size() == w.size());
  for (size_t i = 0; i < pts.size(); ++i) {
    CHECK(std::isfinite(pts[i].e_n_sub));
    if (i) CHECK(pts[i].e_n_sub <= pts[i - 1].e_n_sub);
  }
}

TEST_CASE("next-order mode") {
  SystemParams p = weak_coupling();
  auto first = optimize_mode(p);
  auto second = next_order_mode(p, {first.mode});
  CHECK(std::abs(mode_overlap(second.mode, first.mode)) <= 1e-8);
  CHECK(std::abs(mode_norm(second.mode) - 1.0) < 1e-8);
  CHECK(second.e_n_sub <= first.e_n_sub + 1e-9);
  ModeWeight a = make_mode(p, 1.2, 0.3), b = make_mode(p, 1.25, 0.3);
  CHECK_THROWS(next_order_mode(p, {a, b}));
}

TEST_CASE("local-oscillator envelopes") {
  SystemParams p = weak_coupling();
  ModeWeight m = make_mode(p, 1.01, 0.7);
  std::vector<double> t = {-10.0, -3.3, -0.5, 0.0};
  auto q = lo_waveform(m, kPi / 2, t);
  auto z = lo_waveform(m, 0.0, t);
  for (size_t i = 0; i < t.size(); ++i) {
    double g1 = weight_at(m.g1, t[i]), g2 = weight_at(m.g2, t[i]);
    CHECK(q[i].l1 == doctest::Approx(g1).epsilon(1e-12).scale(1.0));
    CHECK(q[i].l2 == doctest::Approx(g2).epsilon(1e-12).scale(1.0));
    CHECK(z[i].l1 == doctest::Approx(g2).epsilon(1e-12).scale(1.0));
    CHECK(z[i].l2 == doctest::Approx(-g1).epsilon(1e-12).scale(1.0));
    for (double zq : {0.3, 2.0, 5.5}) {
      auto r = lo_waveform(m, zq, {t[i]}).front();
      CHECK(r.l1 * r.l1 + r.l2 * r.l2 == doctest::Approx(g1 * g1 + g2 * g2).epsilon(1e-12).scale(1.0));
    }
  }
}
