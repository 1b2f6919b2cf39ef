#include "cve/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "cve/analytic.hpp"
#include "cve/errors.hpp"
#include "cve/grid.hpp"

namespace cve {

void validate_config(const SystemParams& p, const SimConfig& c) {
  if (!(c.dt > 0) || c.dt * std::max(p.omega_m, p.gamma_m) > 0.01 + 1e-15)
    throw ConfigError("montecarlo: dt * max(omega_m, gamma_m) must be <= 0.01");
  double relax = c.t_relax > 0 ? c.t_relax : 10.0 / p.gamma_m;
  if (relax < 10.0 / p.gamma_m * (1 - 1e-12)) throw ConfigError("montecarlo: t_relax must be >= 10/gamma_m");
  if (!(c.burn_step > 0)) throw ConfigError("montecarlo: burn_step must be positive");
  if (c.n_traj < 1000) throw ConfigError("montecarlo: n_traj must be >= 1000");
  if (!(c.bin_width > 0) || !(c.window > 0)) throw ConfigError("montecarlo: bad field window");
  double per_bin = c.bin_width / c.dt, bins = c.window / c.bin_width;
  if (std::abs(per_bin - std::round(per_bin)) > 1e-9 * per_bin ||
      std::abs(bins - std::round(bins)) > 1e-9 * bins)
    throw ConfigError("montecarlo: bin_width must be a multiple of dt and divide the window");
  if (c.threads < 1) throw ConfigError("montecarlo: threads must be >= 1");
}

int bin_count(const SimConfig& c) { return static_cast<int>(std::lround(c.window / c.bin_width)); }

Vec TrajectorySample::flatten() const {
  Vec v(2 + 2 * X.size());
  v(0) = x;
  v(1) = p;
  for (size_t j = 0; j < X.size(); ++j) {
    v(2 + 2 * j) = X[j];
    v(3 + 2 * j) = Y[j];
  }
  return v;
}

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) {
  // SplitMix64 applied to a counter derived from (master, index)
  std::uint64_t z = master * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

TrajectorySample simulate_trajectory(const SystemParams& p, const SimConfig& c, std::uint64_t index) {
  std::mt19937_64 rng(trajectory_seed(c.seed, index));
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double sx = std::sqrt(2.0 * p.omega_m), sp = std::sqrt(2.0 / p.omega_m);

  // burn-in from rest by exact Gaussian transitions
  Eigen::Matrix2d phi = transfer_matrix(p, c.burn_step);
  Eigen::Matrix2d sig = osc_steady_covariance(p);
  Eigen::Matrix2d noise = sig - phi * sig * phi.transpose();
  noise = 0.5 * (noise + noise.transpose()).eval();
  Eigen::Matrix2d chol = noise.llt().matrixL();
  double relax = c.t_relax > 0 ? c.t_relax : 10.0 / p.gamma_m;
  long nburn = static_cast<long>(std::ceil(relax / c.burn_step));
  Eigen::Vector2d v = Eigen::Vector2d::Zero();
  for (long k = 0; k < nburn; ++k) {
    Eigen::Vector2d z(gauss(rng), gauss(rng));
    v = phi * v + chol * z;
  }

  // field window, semi-implicit Euler-Maruyama in physical units
  double x = v(0) / sx, mom = v(1) / sp;
  const int nb = bin_count(c);
  const long per_bin = std::lround(c.bin_width / c.dt);
  const double dt = c.dt, sdt = std::sqrt(dt);
  const double w2 = p.omega_m * p.omega_m, g2 = 2.0 * p.gamma_m;
  const double eta = p.eta(), kap = p.kappa(), sf = std::sqrt(p.s_f());
  TrajectorySample out;
  out.X.assign(nb, 0.0);
  out.Y.assign(nb, 0.0);
  for (int j = nb - 1; j >= 0; --j) {
    double ax = 0, ay = 0;
    for (long k = 0; k < per_bin; ++k) {
      double dw1 = sdt * gauss(rng), dw2 = sdt * gauss(rng), dw3 = sdt * gauss(rng);
      double mom1 = mom + (-w2 * x - g2 * mom) * dt + eta * dw1 + sf * dw3;
      double x1 = x + mom1 * dt;
      ax += dw1;
      ay += dw2 + kap * 0.5 * (x + x1) * dt;
      x = x1;
      mom = mom1;
    }
    out.X[j] = ax / std::sqrt(c.bin_width);
    out.Y[j] = ay / std::sqrt(c.bin_width);
  }
  out.x = x * sx;
  out.p = mom * sp;
  return out;
}

std::vector<Vec> simulate_ensemble(const SystemParams& p, const SimConfig& c) {
  validate_params(p);
  validate_config(p, c);
  std::vector<Vec> samples(c.n_traj);
  auto work = [&](int t0) {
    for (int i = t0; i < c.n_traj; i += c.threads) samples[i] = simulate_trajectory(p, c, i).flatten();
  };
  if (c.threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < c.threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  return samples;
}

CovEstimate estimate_from_samples(const std::vector<Vec>& samples, int n, int blocks) {
  if (samples.empty()) throw ConfigError("estimate_from_samples: no samples");
  if (n <= 0 || n > static_cast<int>(samples.size())) n = static_cast<int>(samples.size());
  blocks = std::clamp(blocks, 2, n);
  const int d = static_cast<int>(samples.front().size());
  // block sums of outer products, reduced in fixed order
  std::vector<Mat> bsum(blocks, Mat::Zero(d, d));
  std::vector<int> bcount(blocks, 0);
  for (int i = 0; i < n; ++i) {
    int b = static_cast<int>(static_cast<long>(i) * blocks / n);
    bsum[b].selfadjointView<Eigen::Lower>().rankUpdate(samples[i]);
    ++bcount[b];
  }
  Mat total = Mat::Zero(d, d);
  for (int b = 0; b < blocks; ++b) {
    bsum[b] = bsum[b].selfadjointView<Eigen::Lower>();
    total += bsum[b];
  }
  CovEstimate e;
  e.n_traj = n;
  e.mean = total / n;
  Mat acc = Mat::Zero(d, d);
  for (int b = 0; b < blocks; ++b) {
    Mat loo = (total - bsum[b]) / static_cast<double>(n - bcount[b]);
    acc += (loo - e.mean).cwiseAbs2();
  }
  e.se = (acc * (blocks - 1.0) / blocks).cwiseSqrt();
  return e;
}

CovEstimate estimate_covariance(const SystemParams& p, const SimConfig& c) {
  return estimate_from_samples(simulate_ensemble(p, c));
}

Mat reference_covariance(const SystemParams& p, const SimConfig& c, double kernel_scale) {
  OscState osc = steady_state(p);
  FieldKernel k = field_kernel(p);
  for (auto& row : osc.cross)
    for (auto& f : row) f = scaled(f, kernel_scale);
  k.b12 = scaled(k.b12, kernel_scale);
  k.b22 = scaled(k.b22, kernel_scale);
  return build_grid_covariance(osc, k, make_basis(p, tophat_grid(c.window, c.bin_width)));
}

ValidationReport compare(const CovEstimate& full, const CovEstimate& half, const Mat& ref,
                         double z_gate, double min_fraction) {
  ValidationReport r;
  r.n_traj = full.n_traj;
  const int d = static_cast<int>(ref.rows());
  if (full.mean.rows() != d || half.mean.rows() != d)
    throw StructuralError("compare: estimate and reference dimensions differ");
  double sf = 0, sh = 0;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      double err = full.mean(i, j) - ref(i, j);
      double z = full.se(i, j) > 0 ? err / full.se(i, j) : (err == 0 ? 0.0 : INFINITY);
      ++r.entries;
      if (std::abs(z) <= z_gate) ++r.within;
      r.max_abs_z = std::max(r.max_abs_z, std::abs(z));
      sf += err * err;
      double eh = half.mean(i, j) - ref(i, j);
      sh += eh * eh;
    }
  r.fraction = static_cast<double>(r.within) / r.entries;
  r.rms_error_full = std::sqrt(sf / r.entries);
  r.rms_error_half = std::sqrt(sh / r.entries);
  r.scaling_ratio = r.rms_error_full > 0 ? r.rms_error_half / r.rms_error_full : 0.0;
  // halving n should raise the error by sqrt(2); allow a factor 2 either way
  const double expect = std::sqrt(static_cast<double>(full.n_traj) / half.n_traj);
  r.scaling_ok = r.scaling_ratio >= expect / 2 && r.scaling_ratio <= expect * 2;
  r.fraction_ok = r.fraction >= min_fraction;
  r.passed = r.fraction_ok && r.scaling_ok;
  return r;
}

ValidationReport validate(const SystemParams& p, const SimConfig& c, double kernel_scale) {
  auto samples = simulate_ensemble(p, c);
  CovEstimate full = estimate_from_samples(samples);
  CovEstimate half = estimate_from_samples(samples, c.n_traj / 2);
  return compare(full, half, reference_covariance(p, c, kernel_scale));
}

}  // namespace cve
