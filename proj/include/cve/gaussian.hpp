#pragma once
#include <Eigen/Dense>
#include <string>
#include <vector>

namespace cve {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Quadrature ordering is interleaved (q1, p1, q2, p2, ...) everywhere.
constexpr int kQuadsPerMode = 2;

struct ConvergenceInfo {
  bool converged = true;
  std::string method;
  int iterations = 0;
  std::vector<double> trace;  // E_N per refinement or iteration
  std::string note;
};

struct EntanglementResult {
  // sorted ascending; for large matrices only the smallest few are computed
  std::vector<double> symplectic_spectrum;
  double e_n = 0.0;
  int below_unity_count = 0;
  double lambda_min = 1.0;
  ConvergenceInfo info;
};

struct Physicality {
  bool ok = true;
  double margin = 0.0;  // min symplectic eigenvalue - 1
};

// Block-diagonal symplectic form with [[0, 1], [-1, 0]] blocks.
Mat symplectic_form(int modes);

// Eigenvalue moduli of Omega V, sorted, both members of every pair.
std::vector<double> symplectic_moduli(const Mat& V);
std::vector<double> symplectic_eigenvalues(const Mat& V);
// Smallest `count` symplectic eigenvalues, plus all below nu_cut, by Cholesky + Lanczos.
// V must be positive definite.
std::vector<double> smallest_symplectic_eigenvalues(const Mat& V, int count, double nu_cut = 0.0,
                                                   int max_steps = 400);

Mat partial_transpose(const Mat& V, const std::vector<int>& modes);

struct NegativityOptions {
  double below_tol = 0.0;   // eigenvalues < 1 - below_tol are counted
  int dense_limit = 400;    // above this dimension the Lanczos route is used
};

EntanglementResult log_negativity(const Mat& V, const std::vector<int>& partition,
                                  const NegativityOptions& opt = {});

// Minimal symplectic eigenvalue of the partial transpose of a two-mode state.
double two_mode_min_symplectic(const Mat& V);

Physicality check_physicality(const Mat& V, double tol = 1e-6);

// Structural checks shared by the public operations.
void require_covariance(const Mat& V);

}  // namespace cve
