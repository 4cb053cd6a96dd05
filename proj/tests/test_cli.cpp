// End-to-end tests of the command-line tool, run as a subprocess. The binary
// path is injected at compile time through DCONE_CLI_PATH.
#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#ifndef DCONE_CLI_PATH
#error "DCONE_CLI_PATH must point at the built command-line binary"
#endif

namespace {

using nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string out;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string capture = std::string(::testing::TempDir()) + "cli_out_" +
                              std::to_string(counter++) + ".txt";
  const std::string cmd = std::string(DCONE_CLI_PATH) + " " + args + " > " + capture + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(capture);
  std::remove(capture.c_str());
  return r;
}

std::string make_temp_dir(const char* tag) {
  std::string tmpl = std::string(::testing::TempDir()) + tag + "_XXXXXX";
  char* made = mkdtemp(tmpl.data());
  if (made == nullptr) throw std::runtime_error("mkdtemp failed");
  return std::string(made);
}

TEST(Cli, EquatorConeConstantIsZero) {
  const auto r = run_cli("cone c1 --curve equator");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const json out = json::parse(r.out);
  EXPECT_NEAR(out.at("c1").get<double>(), 0.0, 1e-15);
}

TEST(Cli, WaveConeConstantMatchesBothRoutes) {
  const auto r = run_cli("cone c1 --curve latitude-wave --amplitude 0.2 --wavenumber 3");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const json out = json::parse(r.out);
  EXPECT_NEAR(out.at("c1").get<double>(), 9.779319252292, 1e-9 * 9.779319252292);
  EXPECT_LT(out.at("relative_gap").get<double>(), 1e-8);
}

TEST(Cli, SyntheticFitRecoversSlopeAndIntercept) {
  const std::string dir = make_temp_dir("fit");
  const std::string table = dir + "/table.csv";
  {
    std::ofstream t(table);
    t << std::setprecision(17) << "h,energy_over_h2,converged\n";
    for (int k = 4; k <= 9; ++k) {
      const double h = std::pow(2.0, -k);
      t << h << "," << 5.0 * std::log(1.0 / h) + 3.0 << ",1\n";
    }
  }
  const auto r = run_cli("fit --table " + table + " --c1-reference 5");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const json out = json::parse(r.out);
  EXPECT_NEAR(out.at("slope").get<double>(), 5.0, 1e-9);
  EXPECT_NEAR(out.at("intercept").get<double>(), 3.0, 1e-9);
}

TEST(Cli, SolveOutputsAreDeterministic) {
  const std::string d1 = make_temp_dir("det1");
  const std::string d2 = make_temp_dir("det2");
  const std::string args = "solve --family equator --h 2^-3 --n-r 48 --n-theta 64 --seed 7 --out-dir ";
  const auto r1 = run_cli(args + d1);
  const auto r2 = run_cli(args + d2);
  ASSERT_EQ(r1.exit_code, 0) << r1.out;
  ASSERT_EQ(r2.exit_code, 0) << r2.out;
  EXPECT_EQ(slurp(d1 + "/field.json"), slurp(d2 + "/field.json"));
  EXPECT_EQ(slurp(d1 + "/result.json"), slurp(d2 + "/result.json"));
  EXPECT_FALSE(slurp(d1 + "/field.json").empty());
}

TEST(Cli, ProfileSnapshotRoundTripsEnergy) {
  const std::string dir = make_temp_dir("rt");
  const std::string snap = dir + "/profile.json";
  const auto w = run_cli("energy profile --h 2^-5 --n-r 64 --n-theta 64 --out " + snap);
  ASSERT_EQ(w.exit_code, 0) << w.out;
  const double written = json::parse(w.out).at("breakdown").at("total").get<double>();
  const auto e = run_cli("energy eval --field " + snap);
  ASSERT_EQ(e.exit_code, 0) << e.out;
  const double reloaded = json::parse(e.out).at("breakdown").at("total").get<double>();
  EXPECT_NEAR(reloaded, written, 1e-12 * std::abs(written));
}

TEST(Cli, SweepFitAndReportEndToEnd) {
  const std::string dir = make_temp_dir("sweep");
  const auto s = run_cli("sweep --h-from 2^-3 --h-to 2^-6 --factor 2 --n-r 72 --n-theta 64 --out-dir " + dir);
  ASSERT_EQ(s.exit_code, 0) << s.out;
  EXPECT_FALSE(slurp(dir + "/sweep.json").empty());
  EXPECT_FALSE(slurp(dir + "/sweep.csv").empty());
  EXPECT_FALSE(slurp(dir + "/fit.json").empty());

  const auto f = run_cli("fit --sweep-dir " + dir);
  ASSERT_EQ(f.exit_code, 0) << f.out;
  const json fit = json::parse(f.out);
  EXPECT_TRUE(std::isfinite(fit.at("slope").get<double>()));
  EXPECT_TRUE(std::isfinite(fit.at("relative_slope_gap").get<double>()));

  const auto rep = run_cli("report --sweep-dir " + dir);
  ASSERT_EQ(rep.exit_code, 0) << rep.out;
  EXPECT_FALSE(slurp(dir + "/report.csv").empty());
}

TEST(Cli, ExitCodesFollowTheContract) {
  EXPECT_EQ(run_cli("--definitely-not-a-flag").exit_code, 2);
  EXPECT_EQ(run_cli("mesh info --h 0.3").exit_code, 2);  // h outside (0, 1/4]
  EXPECT_EQ(run_cli("solve --h 2^-3 --n-r 48 --n-theta 64 --max-iter 2").exit_code, 4);
  const auto bad = run_cli("curve gen --curve latitude-wave --amplitude 0.6 --wavenumber 2");
  EXPECT_EQ(bad.exit_code, 2);  // amplitude * wavenumber >= 1
  EXPECT_TRUE(json::parse(bad.out).contains("error")) << bad.out;
}

}  // namespace
