#pragma once
#include <vector>

#include "cve/analytic.hpp"
#include "cve/gaussian.hpp"
#include "cve/params.hpp"

namespace cve {

// One orthonormal temporal mode of the past field, supported on s in [start, start + len]:
// phi(start + u) = sum amp * exp(rate * u).
struct BasisFunction {
  double start = 0;
  double len = 0;
  ExpSum terms;
};

// Near zone [0, near_span): top-hat bins of width dt.
// Far zone [near_span, horizon): windows whose length grows as growth * s, each carrying
// cos(w~ u) and sin(w~ u) times envelopes e^{c u} of envelope_order different rates,
// orthonormalized. near_span = horizon gives a pure top-hat grid.
struct GridSpec {
  double horizon = 0;
  double near_span = 0;
  double dt = 0.05;
  int envelope_order = 6;
  double growth = 0.15;
};

struct GridPolicy {
  double tol = 1e-3;
  int max_levels = 5;
  int max_functions = 2048;
  double physicality_tol = 1e-6;
};

// Refinement ladder: level 0 is the coarsest.
GridSpec grid_level(const SystemParams& p, int level);
GridSpec tophat_grid(double horizon, double dt);
void validate_grid(const SystemParams& p, const GridSpec& g);

std::vector<BasisFunction> make_basis(const SystemParams& p, const GridSpec& g);

// (2 + 2N)-dimensional covariance over [x, p, X_0, Y_0, X_1, Y_1, ...].
Mat build_grid_covariance(const SystemParams& p, const GridSpec& g);
Mat build_grid_covariance(const OscState& osc, const FieldKernel& k,
                          const std::vector<BasisFunction>& basis);

// Partial transpose of the oscillator, E_N, and the physicality margin of the
// untransposed matrix (stored in info.note).
// eigenvalues below 1 - below_unity_tol(margin) count as entangled
double below_unity_tol(double margin);
EntanglementResult grid_negativity(const Mat& V, double physicality_tol = 1e-6);

EntanglementResult entanglement_grid(const SystemParams& p, const GridPolicy& policy = {});
// Same ladder with the oscillator replaced by an evolved state (field kernel unchanged).
EntanglementResult entanglement_grid(const SystemParams& p, const OscState& osc,
                                     const GridPolicy& policy = {});

}  // namespace cve
