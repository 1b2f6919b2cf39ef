#pragma once
#include <array>
#include <vector>

#include "cve/analytic.hpp"
#include "cve/gaussian.hpp"
#include "cve/params.hpp"
#include "cve/rational.hpp"

namespace cve {

// Symbol of the field operator: P(Omega) / |D(Omega)|^2 with
// P = Lambda |D|^2 - 4 lambda kappa eta gamma Omega + kappa^2 S_F, Lambda = 1 - lambda^2,
// D = omega_m^2 - Omega^2 - 2 i gamma Omega.
struct SpectralSymbol {
  SystemParams params;
  double lambda = 0;
  std::array<double, 5> quartic{};  // highest power first

  cplx numerator(cplx w) const;
  cplx denominator(cplx w) const;  // D(w) * conj-coefficient D(w)
  cplx operator()(cplx w) const { return numerator(w) / denominator(w); }
};

// D(w) and its conjugate-coefficient partner (zeros in the upper half-plane).
cplx d_factor(const SystemParams& p, cplx w);
cplx d_bar_factor(const SystemParams& p, cplx w);

SpectralSymbol symbol_polynomial(const SystemParams& p, double lambda);
// Lambda + i lambda kappa eta (G - G*) + kappa^2 S_F |G|^2 evaluated from G = 1/D.
cplx symbol_direct(const SystemParams& p, double lambda, double w);

std::array<cplx, 4> quartic_roots(const std::array<double, 5>& c);

struct Factorization {
  SystemParams params;
  double scale = 1;              // sqrt(Lambda)
  std::array<cplx, 2> lower{};   // roots of P with Im < 0
  std::array<cplx, 2> upper{};   // roots of P with Im > 0
  cplx psi_plus(cplx w) const;   // analytic and zero-free in the upper half-plane
  cplx psi_minus(cplx w) const;  // analytic and zero-free in the lower half-plane
  Rational inv_psi_minus() const;
};

Factorization factorize(const SpectralSymbol& s);

double characteristic_det(const SystemParams& p, double lambda);
// Same, with the oscillator replaced by an evolved state (field kernel unchanged).
double characteristic_det(const SystemParams& p, const OscState& osc, double lambda);

struct WienerHopfOptions {
  int scan_points = 64;  // per half of the scan
  double lo = 1e-6;
  double hi = 1.0 - 1e-6;
  double xtol = 1e-10;
  bool allow_multiple = false;
};

// All sign changes of characteristic_det on (lo, hi), bisected.
std::vector<double> bracket_roots(const SystemParams& p, const OscState& osc,
                                  const WienerHopfOptions& opt, int* skipped = nullptr);

EntanglementResult solve_lambda(const SystemParams& p, const WienerHopfOptions& opt = {});
EntanglementResult solve_lambda(const SystemParams& p, const OscState& osc,
                                const WienerHopfOptions& opt = {});

}  // namespace cve
