#include "cve/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include "cve/decoherence.hpp"
#include "cve/errors.hpp"
#include "cve/grid.hpp"
#include "cve/mode_filter.hpp"
#include "cve/montecarlo.hpp"
#include "cve/params.hpp"
#include "cve/wiener_hopf.hpp"

namespace cve {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr const char* kVersion = CVE_VERSION;

struct ParamFlags {
  double qm = 1e3;
  std::optional<double> omega_q, omega_f, nth, ratio;
};

struct Common {
  ParamFlags params;
  std::string method = "wiener-hopf";
  double tol = 1e-3;
  double cross_tol = 1e-3;
  int threads = 1;
  std::string output;
};

SystemParams make_params(const ParamFlags& f, std::optional<double> ratio_override = std::nullopt) {
  std::optional<double> ratio = ratio_override ? ratio_override : f.ratio;
  if (ratio && f.omega_q)
    throw ConflictError("--ratio fixes omega_q; do not combine it with --omega-q");
  std::optional<double> of = f.omega_f, nth = f.nth;
  if (!of && !nth) of = 0.1;
  if (ratio) {
    if (!(*ratio >= 0)) throw InvalidParameter("--ratio must be >= 0");
    // Omega_F from the flags (default 0.1), Omega_q = ratio * Omega_F
    SystemParams base = build_params(1.0, f.qm, 0.0, of, nth);
    return build_params(1.0, f.qm, *ratio * base.omega_f, base.omega_f, std::nullopt);
  }
  return build_params(1.0, f.qm, f.omega_q.value_or(0.1), of, nth);
}

void header(std::ostream& os, const std::string& sub) { os << "# cv-entangle v" << kVersion << ' ' << sub << '\n'; }

void kv(std::ostream& os, const std::string& k, double v) { os << k << '=' << format_double(v) << '\n'; }
void kv(std::ostream& os, const std::string& k, const std::string& v) { os << k << '=' << v << '\n'; }
void kv(std::ostream& os, const std::string& k, int v) { os << k << '=' << v << '\n'; }
void kv(std::ostream& os, const std::string& k, bool v) { os << k << '=' << (v ? "true" : "false") << '\n'; }

std::string join(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
  return s;
}

void print_params(std::ostream& os, const SystemParams& p) {
  kv(os, "qm", p.q_m());
  kv(os, "omega_q", p.omega_q);
  kv(os, "omega_f", p.omega_f);
  kv(os, "n_th", p.n_th);
  if (p.sub_zero_point_bath()) kv(os, "warning", std::string("bath below zero-point (n_th < 0)"));
}

struct Evaluation {
  double e_n = NAN;
  double lambda_min = NAN;
  int below = 0;
  bool converged = false;
  std::string method;
  std::vector<double> trace;
  std::string note;
  double e_grid = NAN, e_wh = NAN;
};

Evaluation evaluate(const SystemParams& p, const std::string& method, double tol, double cross_tol) {
  Evaluation ev;
  ev.method = method;
  auto run_grid = [&]() {
    GridPolicy pol;
    pol.tol = tol;
    return entanglement_grid(p, pol);
  };
  if (method == "grid") {
    auto r = run_grid();
    ev.e_n = ev.e_grid = r.e_n;
    ev.lambda_min = r.lambda_min;
    ev.below = r.below_unity_count;
    ev.converged = r.info.converged;
    ev.trace = r.info.trace;
    ev.note = r.info.method + "; " + r.info.note;
  } else if (method == "wiener-hopf") {
    auto r = solve_lambda(p);
    ev.e_n = ev.e_wh = r.e_n;
    ev.lambda_min = r.lambda_min;
    ev.below = r.below_unity_count;
    ev.converged = r.info.converged;
    ev.note = r.info.note;
  } else {
    auto w = solve_lambda(p);
    auto g = run_grid();
    ev.e_wh = w.e_n;
    ev.e_grid = g.e_n;
    ev.e_n = w.e_n;
    ev.lambda_min = w.lambda_min;
    ev.below = w.below_unity_count;
    ev.trace = g.info.trace;
    ev.converged = w.info.converged && g.info.converged && std::abs(w.e_n - g.e_n) <= cross_tol;
    ev.note = g.info.method + "; " + g.info.note;
  }
  return ev;
}

double closed_form(double ratio) { return 0.5 * std::log1p(25.0 / 8.0 * ratio * ratio); }

std::vector<double> range(double a, double b, int n, bool log_scale) {
  if (n < 1) throw ConfigError("range needs at least one point");
  if (n > 1 && a == b) throw ConfigError("degenerate range");
  if (log_scale && !(a > 0 && b > 0)) throw ConfigError("log range needs positive bounds");
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    v[i] = log_scale ? std::exp(std::log(a) + t * (std::log(b) - std::log(a))) : a + t * (b - a);
  }
  return v;
}

// Runs f(i) for i in [0, n) on a pool; results are written by index, so output order is fixed.
template <class F>
void parallel_for(int n, int threads, F f) {
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&]() {
      for (int i = next++; i < n; i = next++) f(i);
    });
  for (auto& th : pool) th.join();
}

int cmd_negativity(const Common& c, std::ostream& os, std::ostream& err) {
  SystemParams p = make_params(c.params);
  Evaluation ev = evaluate(p, c.method, c.tol, c.cross_tol);
  header(os, "negativity");
  print_params(os, p);
  kv(os, "method", ev.method);
  kv(os, "e_n", ev.e_n);
  kv(os, "lambda_min", ev.lambda_min);
  kv(os, "below_unity_count", ev.below);
  kv(os, "converged", ev.converged);
  kv(os, "trace", join(ev.trace));
  if (c.method == "both") {
    kv(os, "e_n_grid", ev.e_grid);
    kv(os, "e_n_wiener_hopf", ev.e_wh);
    kv(os, "diff", ev.e_grid - ev.e_wh);
    if (!ev.converged) {
      err << "grid and wiener-hopf disagree by " << format_double(ev.e_grid - ev.e_wh) << " (tol "
          << format_double(c.cross_tol) << ")\n";
      return kExitValidation;
    }
  }
  if (!ev.note.empty()) kv(os, "note", ev.note);
  return kExitOk;
}

struct SweepFlags {
  double start = 0.1, stop = 100;
  int points = 50;
  bool linear = false;
};

int cmd_sweep(const Common& c, const SweepFlags& s, std::ostream& os, std::ostream& err) {
  if (c.params.omega_q || c.params.ratio) throw ConflictError("sweep sets omega_q from the ratio range");
  auto ratios = range(s.start, s.stop, s.points, !s.linear);
  std::vector<Evaluation> rows(ratios.size());
  std::vector<std::string> errors(ratios.size());
  make_params(c.params, ratios.front());  // parameter errors abort before the sweep
  parallel_for(static_cast<int>(ratios.size()), c.threads, [&](int i) {
    try {
      rows[i] = evaluate(make_params(c.params, ratios[i]), c.method, c.tol, c.cross_tol);
    } catch (const Error& e) {
      rows[i].method = c.method;
      errors[i] = e.what();
    }
  });
  header(os, "sweep");
  os << "ratio,e_n,e_n_closed_form,method,lambda_min,converged\n";
  int warnings = 0;
  for (size_t i = 0; i < ratios.size(); ++i) {
    const auto& r = rows[i];
    os << format_double(ratios[i]) << ',' << format_double(r.e_n) << ',' << format_double(closed_form(ratios[i]))
       << ',' << r.method << ',' << format_double(r.lambda_min) << ',' << (r.converged ? "true" : "false") << '\n';
    if (!errors[i].empty() || !r.converged) {
      ++warnings;
      err << "warning: ratio " << format_double(ratios[i]) << ": "
          << (errors[i].empty() ? std::string("not converged") : errors[i]) << '\n';
    }
  }
  if (warnings) err << warnings << " of " << ratios.size() << " points failed\n";
  return kExitOk;
}

int cmd_survival(const Common& c, const std::string& engine, std::ostream& os) {
  SystemParams p = make_params(c.params);
  SurvivalOptions so;
  if (engine == "wiener-hopf") so.method = SurvivalMethod::WienerHopf;
  SurvivalResult g = survival_time(p, so);
  SurvivalResult t = survival_time_transcendental(p);
  SurvivalResult h = survival_time_closed_form(p);
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); };
  header(os, "survival");
  print_params(os, p);
  kv(os, "theta_s_" + std::string(engine == "wiener-hopf" ? "wiener_hopf" : "grid"), g.theta_s);
  kv(os, "theta_s_transcendental", t.theta_s);
  kv(os, "theta_s_closed_form", h.theta_s);
  kv(os, "rel_diff_bisection_transcendental", rel(g.theta_s, t.theta_s));
  kv(os, "rel_diff_bisection_closed_form", rel(g.theta_s, h.theta_s));
  kv(os, "rel_diff_transcendental_closed_form", rel(t.theta_s, h.theta_s));
  kv(os, "transcendental_residual", t.residual);
  kv(os, "bisection_evaluations", g.evaluations);
  kv(os, "bisection_bracket", join({g.bracket_lo * p.omega_m, g.bracket_hi * p.omega_m}));
  if (!g.note.empty()) kv(os, "note", g.note);
  return kExitOk;
}

struct ModeFlags {
  bool scan = false;
  double scan_start = 1e-4, scan_stop = 1.0;
  int scan_points = 41;
  bool scan_linear = false;
  std::optional<double> zeta;
  bool lo = false;
  double zeta_q = 0.5 * kPi;
  std::optional<double> lo_span;
  int lo_points = 201;
  bool next_order = false;
};

int cmd_mode(const Common& c, const ModeFlags& m, std::ostream& os, std::ostream& err) {
  SystemParams p = make_params(c.params);
  ModeOptimum opt = optimize_mode(p);
  header(os, "mode");
  print_params(os, p);
  kv(os, "omega_g", opt.mode.omega_g);
  kv(os, "omega_g_rel", (opt.mode.omega_g - p.omega_m) / p.omega_m);
  kv(os, "gamma_g", opt.mode.gamma_g);
  kv(os, "zeta", opt.mode.zeta);
  kv(os, "a_1", opt.mode.a_1);
  kv(os, "a_2", opt.mode.a_2);
  kv(os, "e_n_sub", opt.e_n_sub);
  kv(os, "omega_g_fit", omega_g_fit(p));
  kv(os, "omega_g_rel_diff_fit", (opt.mode.omega_g - omega_g_fit(p)) / omega_g_fit(p));
  for (size_t i = 0; i < opt.starts.size(); ++i) {
    const auto& s = opt.starts[i];
    kv(os, "start" + std::to_string(i),
       join({s.omega_start, s.zeta_start, s.omega_end, s.zeta_end, s.e_n, double(s.evaluations)}) +
           (s.converged ? ";converged" : ";stopped"));
  }
  if (!opt.note.empty()) kv(os, "note", opt.note);
  if (m.next_order) {
    ModeOptimum second = next_order_mode(p, {opt.mode});
    double full = solve_lambda(p, WienerHopfOptions{64, 1e-6, 1 - 1e-6, 1e-10, true}).e_n;
    kv(os, "e_n_sub_2", second.e_n_sub);
    kv(os, "overlap_2_1", std::abs(mode_overlap(second.mode, opt.mode)));
    kv(os, "e_n_sub_sum", opt.e_n_sub + second.e_n_sub);
    kv(os, "e_n_full", full);
  }
  if (m.scan) {
    double zeta = m.zeta.value_or(opt.e_n_sub > 0 ? opt.mode.zeta : kPi / 4);
    auto rel = range(m.scan_start, m.scan_stop, m.scan_points, !m.scan_linear);
    std::vector<double> w(rel.size());
    for (size_t i = 0; i < rel.size(); ++i) w[i] = p.omega_m * (1.0 + rel[i]);
    auto pts = mode_scan(p, w, zeta);
    header(os, "mode-scan");
    os << "omega_g_rel,e_n_sub\n";
    for (size_t i = 0; i < pts.size(); ++i) os << format_double(rel[i]) << ',' << format_double(pts[i].e_n_sub) << '\n';
  }
  if (m.lo) {
    double span = m.lo_span.value_or(std::min(10.0 / std::max(opt.mode.gamma_g, 1e-12), 1e4 / p.omega_m));
    std::vector<double> t = range(-span, 0.0, m.lo_points, false);
    auto lo = lo_waveform(opt.mode, m.zeta_q, t);
    header(os, "mode-lo");
    os << "t,l1,l2\n";
    for (const auto& s : lo) os << format_double(s.t) << ',' << format_double(s.l1) << ',' << format_double(s.l2) << '\n';
  }
  (void)err;
  return kExitOk;
}

struct ValidateFlags {
  SimConfig sim;
  double kernel_scale = 1.0;
};

int cmd_validate(const Common& c, ValidateFlags v, std::ostream& os) {
  SystemParams p = make_params(c.params);
  v.sim.threads = c.threads;
  ValidationReport r = validate(p, v.sim, v.kernel_scale);
  header(os, "validate");
  print_params(os, p);
  kv(os, "n_traj", r.n_traj);
  kv(os, "seed", std::to_string(v.sim.seed));
  kv(os, "dt", v.sim.dt);
  kv(os, "window", v.sim.window);
  kv(os, "bin_width", v.sim.bin_width);
  kv(os, "kernel_scale", v.kernel_scale);
  kv(os, "entries", r.entries);
  kv(os, "within_5se", r.within);
  kv(os, "fraction", r.fraction);
  kv(os, "max_abs_z", r.max_abs_z);
  kv(os, "rms_error_full", r.rms_error_full);
  kv(os, "rms_error_half", r.rms_error_half);
  kv(os, "scaling_ratio", r.scaling_ratio);
  kv(os, "fraction_ok", r.fraction_ok);
  kv(os, "scaling_ok", r.scaling_ok);
  kv(os, "verdict", std::string(r.passed ? "pass" : "fail"));
  return r.passed ? kExitOk : kExitValidation;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // guard against locales with a comma separator
  std::string s(buf);
  std::replace(s.begin(), s.end(), ',', '.');
  return s;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Oscillator/output-field entanglement calculator", "cv-entangle"};
  app.set_version_flag("--version", std::string("cv-entangle ") + kVersion);
  app.set_config("--config", "", "key = value file; flags override it");
  app.require_subcommand(1, 1);
  app.fallthrough();

  Common c;
  app.add_option("--qm", c.params.qm, "mechanical quality factor")->capture_default_str();
  app.add_option("--omega-q", c.params.omega_q, "interaction frequency / omega_m (default 0.1)");
  app.add_option("--omega-f", c.params.omega_f, "thermal force frequency / omega_m (default 0.1)");
  app.add_option("--nth", c.params.nth, "thermal occupation (alternative to --omega-f)");
  app.add_option("--ratio", c.params.ratio, "omega_q / omega_f, omega_f from --omega-f/--nth or 0.1");
  app.add_option("--method", c.method, "grid | wiener-hopf | both")
      ->check(CLI::IsMember({"grid", "wiener-hopf", "both"}))
      ->capture_default_str();
  app.add_option("--tol", c.tol, "grid refinement tolerance")->capture_default_str();
  app.add_option("--cross-tol", c.cross_tol, "allowed grid / wiener-hopf difference for --method both")
      ->capture_default_str();
  app.add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--output", c.output, "output file (default stdout)");

  auto* neg = app.add_subcommand("negativity", "E_N of the oscillator versus its past output field");
  auto* sweep = app.add_subcommand("sweep", "E_N over a range of omega_q / omega_f (CSV)");
  SweepFlags sf;
  sweep->add_option("--start", sf.start)->capture_default_str();
  sweep->add_option("--stop", sf.stop)->capture_default_str();
  sweep->add_option("--points", sf.points)->check(CLI::PositiveNumber)->capture_default_str();
  sweep->add_flag("--linear", sf.linear, "linear spacing (default log)");
  auto* surv = app.add_subcommand("survival", "survival time of the entanglement after decoupling");
  std::string engine = "grid";
  surv->add_option("--bisection", engine, "engine inside the bisection: grid | wiener-hopf")
      ->check(CLI::IsMember({"grid", "wiener-hopf"}))
      ->capture_default_str();
  auto* mode = app.add_subcommand("mode", "optimal single temporal mode");
  ModeFlags mf;
  mode->add_flag("--scan", mf.scan, "E_N^sub versus (omega_g - omega_m)/omega_m (CSV)");
  mode->add_option("--scan-start", mf.scan_start)->capture_default_str();
  mode->add_option("--scan-stop", mf.scan_stop)->capture_default_str();
  mode->add_option("--scan-points", mf.scan_points)->check(CLI::PositiveNumber)->capture_default_str();
  mode->add_flag("--scan-linear", mf.scan_linear);
  mode->add_option("--zeta", mf.zeta, "zeta used by --scan (default: optimum)");
  mode->add_flag("--lo", mf.lo, "local-oscillator envelopes of the optimal mode (CSV)");
  mode->add_option("--zeta-q", mf.zeta_q, "measured quadrature angle")->capture_default_str();
  mode->add_option("--lo-span", mf.lo_span, "LO samples cover t in [-span, 0]");
  mode->add_option("--lo-points", mf.lo_points)->check(CLI::PositiveNumber)->capture_default_str();
  mode->add_flag("--next-order", mf.next_order, "also optimize the next orthogonal mode");
  auto* val = app.add_subcommand("validate", "Monte-Carlo check of the analytic covariance");
  ValidateFlags vf;
  val->add_option("--n-traj", vf.sim.n_traj)->capture_default_str();
  val->add_option("--seed", vf.sim.seed)->capture_default_str();
  val->add_option("--dt", vf.sim.dt)->capture_default_str();
  val->add_option("--window", vf.sim.window)->capture_default_str();
  val->add_option("--bin-width", vf.sim.bin_width)->capture_default_str();
  val->add_option("--t-relax", vf.sim.t_relax, "burn-in (default 10/gamma_m)");
  val->add_option("--kernel-scale", vf.kernel_scale, "scale the reference kernels (test fixture)")
      ->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::ofstream file;
  std::ostream* os = &out;
  if (!c.output.empty()) {
    file.open(c.output, std::ios::binary);
    if (!file) {
      err << "error: cannot open " << c.output << '\n';
      return kExitConfig;
    }
    os = &file;
  }
  try {
    if (*neg) return cmd_negativity(c, *os, err);
    if (*sweep) return cmd_sweep(c, sf, *os, err);
    if (*surv) return cmd_survival(c, engine, *os);
    if (*mode) return cmd_mode(c, mf, *os, err);
    if (*val) return cmd_validate(c, vf, *os);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.exit_code();
  }
  return kExitConfig;
}

}  // namespace cve
