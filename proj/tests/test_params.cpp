#include <doctest.h>

#include <cmath>
#include <random>

#include "cve/errors.hpp"
#include "cve/params.hpp"

using namespace cve;

TEST_CASE("build from omega_f keeps the temperature relation") {
  SystemParams p = build_params(1.0, 1e3, 0.02, 0.02, std::nullopt);
  CHECK(p.gamma_m == doctest::Approx(5e-4).epsilon(1e-15));
  CHECK(p.q_m() == doctest::Approx(1e3));
  CHECK(p.omega_f * p.omega_f == doctest::Approx(p.gamma_m * p.omega_m * (2 * p.n_th + 1)).epsilon(1e-14));
  CHECK(p.n_th == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK(p.sub_zero_point_bath());
  CHECK_NOTHROW(validate_params(p));
}

TEST_CASE("zero temperature bath") {
  SystemParams p = build_params(1.0, 1e3, 0.0, std::nullopt, 0.0);
  CHECK(p.omega_f * p.omega_f == doctest::Approx(p.gamma_m * p.omega_m).epsilon(1e-15));
  SystemParams d = build_params(1.0, 1e3, 0.0, std::nullopt, std::nullopt);
  CHECK(d.omega_f == p.omega_f);
}

TEST_CASE("n_th = 100 and the two survival forms") {
  SystemParams p = build_params(1.0, 1e3, 0.1, std::nullopt, 100.0);
  CHECK(p.omega_f * p.omega_f == doctest::Approx(p.gamma_m * 201).epsilon(1e-14));
  // independent route: theta_s = 5/2 (omega_m/omega_f)^2 with omega_f^2 recomputed by hand
  double of2 = 1.0 / (2 * 1e3) * 1.0 * 201.0;
  CHECK(2.5 / of2 == doctest::Approx(5e3 / 201.0).epsilon(1e-13));
  CHECK(p.theta_s_from_omega_f() == doctest::Approx(p.theta_s_from_nth()).epsilon(1e-12));
}

TEST_CASE("round trip n_th -> omega_f -> n_th") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> lq(0.5, 6.0), ln(-0.49, 4.0), wm(0.2, 5.0);
  for (int i = 0; i < 200; ++i) {
    double q = std::pow(10.0, lq(rng)), n = std::pow(10.0, ln(rng)) - 0.4, w = wm(rng);
    if (n < -0.5) n = -0.45;
    SystemParams a = build_params(w, q, 0.1, std::nullopt, n);
    SystemParams b = build_params(w, q, 0.1, a.omega_f, std::nullopt);
    CHECK(b.n_th == doctest::Approx(n).epsilon(1e-12).scale(1.0));
    CHECK(a.theta_s_from_omega_f() == doctest::Approx(a.theta_s_from_nth()).epsilon(1e-12));
  }
}

TEST_CASE("invalid parameters") {
  CHECK_THROWS_AS(build_params(0.0, 1e3, 0.1, 0.1, std::nullopt), InvalidParameter);
  CHECK_THROWS_AS(build_params(-1.0, 1e3, 0.1, 0.1, std::nullopt), InvalidParameter);
  CHECK_THROWS_AS(build_params(1.0, 0.5, 0.1, 0.1, std::nullopt), InvalidParameter);
  CHECK_THROWS_AS(build_params(1.0, 1e3, -0.1, 0.1, std::nullopt), InvalidParameter);
  CHECK_THROWS_AS(build_params(1.0, 1e3, NAN, 0.1, std::nullopt), InvalidParameter);
  CHECK_THROWS_AS(build_params(1.0, 1e3, 0.1, -0.1, std::nullopt), InvalidParameter);
  CHECK_THROWS_AS(build_params(1.0, 1e3, 0.1, std::nullopt, -0.6), InvalidParameter);
  SystemParams bad;
  bad.gamma_m = 2.0;
  CHECK_THROWS_AS(validate_params(bad), InvalidParameter);
}

TEST_CASE("omega_f and n_th together") {
  CHECK_THROWS_AS(build_params(1.0, 1e3, 0.1, 0.5, 100.0), ConflictError);
  SystemParams p = build_params(1.0, 1e3, 0.1, std::nullopt, 100.0);
  CHECK_NOTHROW(build_params(1.0, 1e3, 0.1, p.omega_f, 100.0));
  CHECK(kExitConfig == ConflictError("x").exit_code());
}
