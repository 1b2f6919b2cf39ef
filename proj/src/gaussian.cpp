#include "cve/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cve/errors.hpp"

namespace cve {

Mat symplectic_form(int modes) {
  Mat J = Mat::Zero(2 * modes, 2 * modes);
  for (int k = 0; k < modes; ++k) {
    J(2 * k, 2 * k + 1) = 1.0;
    J(2 * k + 1, 2 * k) = -1.0;
  }
  return J;
}

void require_covariance(const Mat& V) {
  if (V.rows() != V.cols() || V.rows() == 0 || V.rows() % 2 != 0)
    throw StructuralError("covariance must be square with even dimension");
  if (!V.allFinite()) throw StructuralError("covariance has non-finite entries");
  double scale = V.cwiseAbs().maxCoeff();
  double asym = (V - V.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * std::max(scale, 1.0)) throw StructuralError("covariance is not symmetric");
}

std::vector<double> symplectic_moduli(const Mat& V) {
  require_covariance(V);
  int modes = static_cast<int>(V.rows() / 2);
  Mat W = symplectic_form(modes) * V;
  Eigen::EigenSolver<Mat> es(W, false);
  std::vector<double> mods(W.rows());
  for (int i = 0; i < W.rows(); ++i) mods[i] = std::abs(es.eigenvalues()[i]);
  std::sort(mods.begin(), mods.end());
  return mods;
}

std::vector<double> symplectic_eigenvalues(const Mat& V) {
  auto mods = symplectic_moduli(V);
  std::vector<double> out;
  out.reserve(mods.size() / 2);
  for (size_t i = 0; i + 1 < mods.size(); i += 2) out.push_back(0.5 * (mods[i] + mods[i + 1]));
  return out;
}

namespace {

// Top eigenvalues of a symmetric positive operator via Lanczos with full reorthogonalization.
// Returns the top `count` eigenvalues plus every eigenvalue above theta_cut.
template <class Op>
std::vector<double> lanczos_top(Op apply, int n, int count, int max_steps, double theta_cut) {
  max_steps = std::min(max_steps, n);
  Mat Q(n, max_steps + 1);
  std::vector<double> alpha, beta;
  Vec q = Vec::Ones(n);
  for (int i = 0; i < n; ++i) q[i] += 0.37 * std::sin(1.7 * i + 0.3);
  q.normalize();
  Q.col(0) = q;
  std::vector<double> ritz;
  for (int j = 0; j < max_steps; ++j) {
    Vec w = apply(Q.col(j));
    double a = Q.col(j).dot(w);
    alpha.push_back(a);
    // two passes of classical Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass) {
      Vec c = Q.leftCols(j + 1).transpose() * w;
      w -= Q.leftCols(j + 1) * c;
    }
    double b = w.norm();
    int m = j + 1;
    bool check = (m >= count + 4 && (m % 8 == 0)) || m == max_steps || b < 1e-14;
    if (check) {
      Mat T = Mat::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Mat> es(T);
      const Vec& th = es.eigenvalues();
      bool ok = true;
      for (int i = 0; i < m; ++i) {
        int idx = m - 1 - i;
        if (i >= count && th[idx] < theta_cut * (1.0 - 1e-3)) break;
        double res = std::abs(b * es.eigenvectors()(m - 1, idx));
        if (res > 1e-10 * std::abs(th[idx])) ok = false;
      }
      ritz.assign(th.data(), th.data() + m);
      if (ok || m == max_steps || b < 1e-14) break;
    }
    beta.push_back(b);
    Q.col(j + 1) = w / b;
  }
  std::sort(ritz.rbegin(), ritz.rend());
  // a Krylov space sees each degenerate eigenspace once; rounding can leak a ghost copy
  std::vector<double> out;
  for (double t : ritz) {
    if (!out.empty() && std::abs(out.back() - t) <= 1e-8 * std::abs(t)) continue;
    if (static_cast<int>(out.size()) >= count && t < theta_cut) break;
    out.push_back(t);
  }
  return out;
}

}  // namespace

std::vector<double> smallest_symplectic_eigenvalues(const Mat& V, int count, double nu_cut,
                                                   int max_steps) {
  require_covariance(V);
  const int n = static_cast<int>(V.rows());
  Eigen::LLT<Mat> llt(V);
  if (llt.info() != Eigen::Success) throw DegeneracyError("covariance is not positive definite to working precision");
  const Mat& LL = llt.matrixLLT();
  // K = L^T J L; K^{-1} x = -L^{-1} J L^{-T} x; operator -K^{-2} has eigenvalues 1/nu^2
  auto kinv = [&](const Vec& x) {
    Vec t = LL.triangularView<Eigen::Lower>().transpose().solve(x);
    Vec u(n);
    for (int k = 0; k < n; k += 2) {
      u[k] = -t[k + 1];
      u[k + 1] = t[k];
    }
    return Vec(LL.triangularView<Eigen::Lower>().solve(u));
  };
  auto op = [&](const Vec& x) { return Vec(-kinv(kinv(x))); };
  double theta_cut = nu_cut > 0 ? 1.0 / (nu_cut * nu_cut) : 1e300;
  auto top = lanczos_top(op, n, count, std::min(n, max_steps), theta_cut);
  std::vector<double> nu;
  for (double t : top) nu.push_back(1.0 / std::sqrt(t));
  std::sort(nu.begin(), nu.end());
  return nu;
}

Mat partial_transpose(const Mat& V, const std::vector<int>& modes) {
  require_covariance(V);
  if (modes.empty()) throw StructuralError("partial transpose needs a nonempty subset");
  int m = static_cast<int>(V.rows() / 2);
  Mat out = V;
  for (int k : modes) {
    if (k < 0 || k >= m) throw StructuralError("mode index out of range");
    out.row(2 * k + 1) *= -1.0;
    out.col(2 * k + 1) *= -1.0;
  }
  return out;
}

EntanglementResult log_negativity(const Mat& V, const std::vector<int>& partition,
                                  const NegativityOptions& opt) {
  EntanglementResult r;
  Mat P = partial_transpose(V, partition);
  std::vector<double> spec;
  if (P.rows() <= opt.dense_limit) {
    spec = symplectic_eigenvalues(P);
    r.info.method = "dense";
  } else {
    spec = smallest_symplectic_eigenvalues(P, 2, 1.0 - opt.below_tol);
    r.info.method = "lanczos";
  }
  r.symplectic_spectrum = spec;
  r.lambda_min = spec.empty() ? 1.0 : spec.front();
  double acc = 0.0;
  for (double l : spec)
    if (l < 1.0 - opt.below_tol) {
      acc -= std::log(l);
      ++r.below_unity_count;
    }
  r.e_n = std::max(acc, 0.0);
  return r;
}

double two_mode_min_symplectic(const Mat& V) {
  require_covariance(V);
  if (V.rows() != 4) throw StructuralError("two_mode_min_symplectic needs a 4x4 matrix");
  Eigen::Matrix2d A = V.topLeftCorner(2, 2), B = V.bottomRightCorner(2, 2), C = V.topRightCorner(2, 2);
  double delta = A.determinant() + B.determinant() - 2.0 * C.determinant();
  // det V through the Schur complement keeps precision when the blocks are huge
  double detv;
  if (std::abs(B.determinant()) > 0) {
    Eigen::Matrix2d S = A - C * B.inverse() * C.transpose();
    detv = B.determinant() * S.determinant();
  } else {
    detv = V.determinant();
  }
  double disc = delta * delta - 4.0 * detv;
  if (disc < -1e-10 * std::max(delta * delta, 1.0))
    throw DegeneracyError("two_mode_min_symplectic: negative discriminant");
  disc = std::max(disc, 0.0);
  // nu_- nu_+ = sqrt(det V); the larger root has no cancellation
  double nup2 = 0.5 * (delta + std::sqrt(disc));
  if (nup2 <= 0) throw DegeneracyError("two_mode_min_symplectic: degenerate spectrum");
  return std::sqrt(std::max(detv, 0.0) / nup2);
}

Physicality check_physicality(const Mat& V, double tol) {
  require_covariance(V);
  double mn;
  if (V.rows() <= 400) {
    auto s = symplectic_eigenvalues(V);
    mn = *std::min_element(s.begin(), s.end());
  } else {
    Eigen::LLT<Mat> llt(V);
    if (llt.info() != Eigen::Success) return {false, -1.0};
    // a short run converges the extreme Ritz value well enough for a tolerance check
    mn = smallest_symplectic_eigenvalues(V, 1, 0.0, 60).front();
  }
  return {mn >= 1.0 - tol, mn - 1.0};
}

}  // namespace cve
