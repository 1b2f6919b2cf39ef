#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "cve/cli.hpp"
#include "cve/errors.hpp"
#include "cve/mode_filter.hpp"
#include "cve/wiener_hopf.hpp"

using namespace cve;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    auto eq = line.find('=');
    if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> v;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) v.push_back(line);
  return v;
}

std::vector<double> csv_row(const std::string& line) {
  std::vector<double> v;
  std::istringstream is(line);
  std::string cell;
  while (std::getline(is, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
  return v;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  CHECK(std::strtod(format_double(M_PI).c_str(), nullptr) == M_PI);
}

TEST_CASE("negativity report") {
  auto r = run({"negativity", "--omega-q", "0"});
  CHECK(r.code == 0);
  CHECK(lines(r.out).front() == "# cv-entangle v0.1.0 negativity");
  CHECK(parse_kv(r.out)["e_n"] == "0");

  auto w = run({"negativity", "--ratio", "1"});
  REQUIRE(w.code == 0);
  double e = std::strtod(parse_kv(w.out)["e_n"].c_str(), nullptr);
  SystemParams p = build_params(1.0, 1e3, 0.1, 0.1, std::nullopt);
  CHECK(e == solve_lambda(p).e_n);
  CHECK(parse_kv(w.out)["below_unity_count"] == "1");
}

TEST_CASE("method both") {
  std::vector<std::string> a = {"--qm", "50", "--omega-q", "0.2", "--omega-f", "0.2", "--method", "both", "negativity"};
  auto ok = run(a);
  CHECK(ok.code == 0);
  auto kv = parse_kv(ok.out);
  CHECK(std::abs(std::strtod(kv["diff"].c_str(), nullptr)) <= 1e-3);
  a.insert(a.begin(), {"--cross-tol", "1e-14"});
  auto bad = run(a);
  CHECK(bad.code == kExitValidation);
  CHECK(bad.err.find("disagree") != std::string::npos);
}

TEST_CASE("sweep output") {
  auto s = run({"sweep", "--start", "0.3", "--stop", "3", "--points", "3"});
  REQUIRE(s.code == 0);
  auto l = lines(s.out);
  REQUIRE(l.size() == 5);
  CHECK(l[0] == "# cv-entangle v0.1.0 sweep");
  CHECK(l[1] == "ratio,e_n,e_n_closed_form,method,lambda_min,converged");
  double prev = 0;
  for (int i = 2; i < 5; ++i) {
    auto row = csv_row(l[i]);
    CHECK(row[2] == doctest::Approx(0.5 * std::log1p(25.0 / 8.0 * row[0] * row[0])).epsilon(1e-15));
    CHECK(row[1] > prev);
    prev = row[1];
    CHECK(l[i].find(",wiener-hopf,") != std::string::npos);
  }
  CHECK(run({"sweep", "--start", "0.3", "--stop", "3", "--points", "3"}).out == s.out);

  auto one = run({"sweep", "--start", "2", "--stop", "2", "--points", "1"});
  auto neg = run({"negativity", "--ratio", "2"});
  CHECK(csv_row(lines(one.out)[2])[1] == std::strtod(parse_kv(neg.out)["e_n"].c_str(), nullptr));
  auto threaded = run({"--threads", "2", "sweep", "--start", "0.3", "--stop", "3", "--points", "3"});
  CHECK(threaded.out == s.out);
}

TEST_CASE("configuration errors map to exit code 2") {
  CHECK(run({"negativity", "--ratio", "1", "--omega-q", "0.1"}).code == kExitConfig);
  CHECK(run({"negativity", "--omega-f", "0.5", "--nth", "100"}).code == kExitConfig);
  CHECK(run({"negativity", "--qm", "0.3"}).code == kExitConfig);
  CHECK(run({"negativity", "--method", "magic"}).code == kExitConfig);
  CHECK(run({"--bogus", "negativity"}).code == kExitConfig);
  CHECK(run({}).code == kExitConfig);
  CHECK(run({"sweep", "--start", "1", "--stop", "1", "--points", "4"}).code == kExitConfig);
  CHECK(run({"validate", "--n-traj", "10"}).code == kExitConfig);
}

TEST_CASE("config file with flag override") {
  auto path = std::filesystem::temp_directory_path() / "cve_cli_test.conf";
  {
    std::ofstream f(path);
    f << "qm = 50\nomega-q = 0.2\nomega-f = 0.2\n";
  }
  auto a = run({"--config", path.string(), "negativity"});
  REQUIRE(a.code == 0);
  auto kv = parse_kv(a.out);
  CHECK(std::strtod(kv["qm"].c_str(), nullptr) == doctest::Approx(50));
  CHECK(std::strtod(kv["omega_q"].c_str(), nullptr) == 0.2);
  auto b = run({"--config", path.string(), "--omega-q", "0.1", "negativity"});
  CHECK(std::strtod(parse_kv(b.out)["omega_q"].c_str(), nullptr) == 0.1);
  std::filesystem::remove(path);
}

TEST_CASE("survival without entanglement exits 3") {
  auto r = run({"survival", "--omega-q", "0", "--bisection", "wiener-hopf"});
  CHECK(r.code == kExitConvergence);
}

TEST_CASE("survival report") {
  auto r = run({"--qm", "50", "--omega-q", "0.3", "--omega-f", "0.2", "survival", "--bisection", "wiener-hopf"});
  REQUIRE(r.code == 0);
  auto kv = parse_kv(r.out);
  CHECK(std::abs(std::strtod(kv["transcendental_residual"].c_str(), nullptr)) <= 1e-9);
  CHECK(std::strtod(kv["theta_s_wiener_hopf"].c_str(), nullptr) > 0);
  CHECK(kv.count("theta_s_closed_form") == 1);
}

TEST_CASE("mode report and LO envelopes") {
  auto r = run({"--qm", "1e3", "--omega-q", "0.02", "--omega-f", "0.02", "mode", "--lo", "--zeta-q", "1.5708",
                "--lo-span", "50", "--lo-points", "11"});
  REQUIRE(r.code == 0);
  auto kv = parse_kv(r.out);
  double omega = std::strtod(kv["omega_g"].c_str(), nullptr), zeta = std::strtod(kv["zeta"].c_str(), nullptr);
  CHECK(omega == doctest::Approx(1.0).epsilon(1e-2));
  SystemParams p = build_params(1.0, 1e3, 0.02, 0.02, std::nullopt);
  ModeWeight m = make_mode_from_gamma(p, std::strtod(kv["gamma_g"].c_str(), nullptr), zeta);
  auto l = lines(r.out);
  size_t at = 0;
  while (at < l.size() && l[at] != "t,l1,l2") ++at;
  REQUIRE(at + 11 < l.size() + 1);
  CHECK(l[at - 1] == "# cv-entangle v0.1.0 mode-lo");
  for (size_t i = at + 1; i < l.size(); ++i) {
    auto row = csv_row(l[i]);
    CHECK(row[1] == doctest::Approx(weight_at(m.g1, row[0])).epsilon(1e-4).scale(1.0));
  }
  auto scan = run({"--qm", "1e3", "--omega-q", "0.02", "--omega-f", "0.02", "mode", "--scan", "--scan-points", "5"});
  CHECK(scan.out.find("omega_g_rel,e_n_sub\n") != std::string::npos);
}

TEST_CASE("validate verdicts and reruns") {
  std::vector<std::string> a = {"--qm", "100", "--omega-q", "0.3", "--omega-f", "0.2", "validate", "--n-traj", "2000",
                                "--window", "0.5", "--seed", "3"};
  auto r1 = run(a), r2 = run(a);
  CHECK(r1.code == 0);
  CHECK(r1.out == r2.out);
  CHECK(parse_kv(r1.out)["verdict"] == "pass");
  a.insert(a.end(), {"--kernel-scale", "3"});
  auto bad = run(a);
  CHECK(bad.code == kExitValidation);
  CHECK(parse_kv(bad.out)["verdict"] == "fail");
}

TEST_CASE("output file and the installed binary") {
  auto path = std::filesystem::temp_directory_path() / "cve_cli_out.txt";
  auto r = run({"--output", path.string(), "negativity", "--omega-q", "0"});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  CHECK(parse_kv(ss.str())["e_n"] == "0");
  std::filesystem::remove(path);
  std::string exe = CVE_CLI_PATH;
  int ok = std::system((exe + " negativity --omega-q 0 > /dev/null").c_str());
  CHECK(WEXITSTATUS(ok) == 0);
  int bad = std::system((exe + " negativity --nope 2> /dev/null").c_str());
  CHECK(WEXITSTATUS(bad) == 2);
}
