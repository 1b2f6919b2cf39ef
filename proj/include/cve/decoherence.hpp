#pragma once
#include <string>
#include <vector>

#include "cve/gaussian.hpp"
#include "cve/grid.hpp"
#include "cve/params.hpp"

namespace cve {

struct SurvivalResult {
  double tau_s = 0;
  double theta_s = 0;  // omega_m * tau_s
  std::string method;
  double bracket_lo = 0;
  double bracket_hi = 0;
  double residual = 0;  // nu_min - 1 (grid) or equation residual (transcendental)
  int evaluations = 0;
  std::string note;
};

enum class SurvivalMethod { Grid, WienerHopf };

struct SurvivalOptions {
  SurvivalMethod method = SurvivalMethod::Grid;
  int grid_level = 1;         // fixed refinement level used inside the bisection
  double theta_tol = 1e-3;    // omega_m * delta tau
  int max_doublings = 14;
};

// E_N between the past output field and the oscillator after free evolution for tau.
EntanglementResult entanglement_after(const SystemParams& p, double tau, const GridPolicy& policy = {});

// Smallest partially transposed symplectic eigenvalue at tau on one grid level, and the
// below-unity threshold 1 - max(1e-6, 1.5 * untransposed deficit) used by the grid engine.
struct BoundaryProbe {
  double nu_min = 1;
  double threshold = 1;
  double gap() const { return nu_min - threshold; }
};
BoundaryProbe min_symplectic_after(const SystemParams& p, double tau, int level);

SurvivalResult survival_time(const SystemParams& p, const SurvivalOptions& opt = {});

// Smallest positive root of 4 OF^4 th^2 - (2 OF^2 + Oq^2)^2 sin^2 th - 25 wm^4 = 0.
double transcendental_residual(const SystemParams& p, double theta);
SurvivalResult survival_time_transcendental(const SystemParams& p);

// High-Q weak-coupling limit 5 Qm / (2 n_th + 1).
SurvivalResult survival_time_closed_form(const SystemParams& p);

}  // namespace cve
