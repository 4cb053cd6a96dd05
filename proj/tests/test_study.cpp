#include "dcone/study.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dcone/common.hpp"
#include "dcone/solve.hpp"
#include "test_util.hpp"

namespace {

TEST(Study, SyntheticLogLawFitIsExact) {
  std::vector<dcone::FitPoint> pts;
  for (int k = 4; k <= 8; ++k) {
    const double h = std::pow(2.0, -k);
    pts.push_back({h, 5.0 * std::log(1.0 / h) + 3.0, true});
  }
  const auto fit = dcone::fit_log_scaling_points(pts, 5.0);
  EXPECT_NEAR(fit.slope, 5.0, 1e-12);
  EXPECT_NEAR(fit.intercept, 3.0, 1e-11);
  EXPECT_LT(fit.residual_rms, 1e-12);
  EXPECT_LT(fit.relative_slope_gap, 1e-12);
  EXPECT_EQ(fit.n_used, 5);
  EXPECT_EQ(fit.h_min, std::pow(2.0, -8));
  EXPECT_EQ(fit.h_max, std::pow(2.0, -4));
}

TEST(Study, FitSkipsNonConvergedPoints) {
  std::vector<dcone::FitPoint> pts;
  for (int k = 4; k <= 8; ++k) {
    const double h = std::pow(2.0, -k);
    pts.push_back({h, 5.0 * std::log(1.0 / h) + 3.0, true});
  }
  pts.push_back({std::pow(2.0, -9), 1e6, false});  // junk that must be ignored
  const auto fit = dcone::fit_log_scaling_points(pts, 5.0);
  EXPECT_EQ(fit.n_used, 5);
  EXPECT_NEAR(fit.slope, 5.0, 1e-12);
}

TEST(Study, FitRequiresFourPoints) {
  std::vector<dcone::FitPoint> pts = {{0.1, 1.0, true}, {0.05, 2.0, true}, {0.025, 3.0, true}};
  EXPECT_THROW(dcone::fit_log_scaling_points(pts, 1.0), dcone::config_error);
  pts.push_back({0.0125, 4.0, false});  // present but not converged
  EXPECT_THROW(dcone::fit_log_scaling_points(pts, 1.0), dcone::config_error);
}

TEST(Study, DeviationOfExactConeIsZero) {
  const auto mesh = dtest::small_mesh(0.125, 48, 64);
  const auto curve = dtest::wave_curve(64);
  const auto y = dcone::make_cone_field(mesh, curve);
  const auto e = dcone::deviation_field(y, curve);
  for (const auto& c : e.comp) EXPECT_EQ(c.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Study, DeviationVanishesOnBoundaryAfterSolve) {
  const auto spec = [] {
    dcone::MeshSpec s;
    s.n_r = 96;
    s.n_theta = 128;
    return s;
  }();
  const double h = 1.0 / 32.0;
  const auto mesh = dcone::build_mesh(spec, h);
  const auto curve = dtest::wave_curve(128);
  dcone::EnergyModel model(mesh);
  dcone::SolveConfig cfg;
  const auto r = dcone::minimize_energy(model, curve, dcone::make_profile_field(mesh, curve, h), h, cfg);
  const auto e = dcone::deviation_field(r.y, curve);
  const int last = e.rows() - 1;
  for (const auto& c : e.comp) EXPECT_EQ(c.row(last).cwiseAbs().maxCoeff(), 0.0);

  // Diagnostics on the converged result are finite and populated.
  const auto d = dcone::lemma_diagnostics(r, curve);
  EXPECT_TRUE(std::isfinite(d.sup_core));
  EXPECT_TRUE(std::isfinite(d.excess));
  EXPECT_FALSE(d.annuli.empty());
  for (const auto& a : d.annuli) {
    EXPECT_TRUE(std::isfinite(a.ratio_primary));
    EXPECT_GE(a.e_l2_sq, 0.0);
    EXPECT_GT(a.bound_primary, 0.0);
  }
  // Only annuli wide enough for the double-log window are listed.
  for (const auto& a : d.annuli) EXPECT_GE(a.r0, h * std::log(1.0 / h));
}

TEST(Study, DiagnosticsRejectUnresolvedCore) {
  // A uniform mesh whose first ring sits outside B_h cannot measure the core.
  dcone::MeshSpec spec;
  spec.n_r = 24;
  spec.n_theta = 64;
  spec.grading = dcone::Grading::uniform;
  const double h = 0.01;
  const auto mesh = dcone::build_mesh(spec, h);
  const auto curve = dtest::wave_curve(64);
  dcone::SolveResult r;
  r.y = dcone::make_profile_field(mesh, curve, h);
  r.h = h;
  dcone::EnergyModel model(mesh);
  r.breakdown = model.evaluate(r.y, h);
  r.converged = true;
  EXPECT_THROW(dcone::lemma_diagnostics(r, curve), dcone::config_error);
}

TEST(Study, MeanDriftProbeShapes) {
  dcone::MeshSpec spec;
  spec.n_r = 128;
  spec.n_theta = 128;
  const auto mesh = dcone::build_mesh(spec, 0.004);
  std::vector<double> eps;
  for (int k = 2; k <= 8; ++k) eps.push_back(std::pow(2.0, -k));
  const auto rows = dcone::probe_mean_drift(mesh, eps, 1e-3);
  ASSERT_EQ(rows.size(), 3 * eps.size());
  double ref = -1.0;  // ratio at eps = 2^-4
  for (const auto& r : rows) {
    if (r.function == "constant") EXPECT_LT(r.drift, 1e-13);
    if (r.function == "x1") EXPECT_LT(r.drift, 1e-13);  // odd symmetry
    if (r.function == "log_family" && r.eps == std::pow(2.0, -4)) ref = r.ratio;
  }
  ASSERT_GT(ref, 0.0);
  // The normalized drift saturates: every smaller radius stays within a
  // factor 2 of the reference value.
  for (const auto& r : rows)
    if (r.function == "log_family" && r.eps <= std::pow(2.0, -4)) {
      EXPECT_GT(r.ratio, 0.0);
      EXPECT_LT(r.ratio, 2.0 * ref);
    }
  EXPECT_THROW(dcone::probe_mean_drift(mesh, eps, 0.0), dcone::config_error);
}

TEST(Study, CoreSupProbeShapes) {
  dcone::MeshSpec spec;
  spec.n_r = 128;
  spec.n_theta = 128;
  const auto mesh = dcone::build_mesh(spec, 0.004);
  std::vector<double> hs;
  for (int k = 3; k <= 6; ++k) hs.push_back(std::pow(2.0, -k));
  const auto rows = dcone::probe_core_sup(mesh, hs);
  ASSERT_EQ(rows.size(), 3 * hs.size());
  std::vector<double> quad_ratios;
  for (const auto& r : rows) {
    if (r.function == "quadratic") quad_ratios.push_back(r.ratio);
    if (r.function == "linear") EXPECT_LT(r.sup, 1e-12);  // flattening is exact on affine data
    if (r.function == "oscillatory") EXPECT_LT(r.ratio, 1.0);
  }
  ASSERT_EQ(quad_ratios.size(), hs.size());
  for (double q : quad_ratios) EXPECT_NEAR(q, quad_ratios.front(), quad_ratios.front() * 1e-2);
}

TEST(Study, TraceProbeBounded) {
  dcone::MeshSpec spec;
  spec.n_r = 128;
  spec.n_theta = 128;
  const auto mesh = dcone::build_mesh(spec, 0.004);
  const auto rows = dcone::probe_trace_ratios(mesh, {1, 2, 4, 8, 16});
  ASSERT_EQ(rows.size(), 5u);
  for (const auto& r : rows) {
    EXPECT_GT(r.trace_ratio, 0.0);
    EXPECT_LT(r.trace_ratio, 2.5);
    EXPECT_GT(r.grad_ratio, 0.0);
    EXPECT_LT(r.grad_ratio, 2.5);
  }
}

TEST(Study, SweepCsvHasHeaderAndRows) {
  const auto spec = [] {
    dcone::MeshSpec s;
    s.n_r = 96;
    s.n_theta = 128;
    return s;
  }();
  const auto curve = dtest::wave_curve(128);
  dcone::SolveConfig cfg;
  cfg.continuation = dcone::Continuation::from_previous_h;
  const auto sweep = dcone::continuation_sweep(curve, spec, {1.0 / 16.0, 1.0 / 32.0}, cfg);
  const std::string csv = dcone::sweep_table_csv(sweep, curve);
  std::istringstream is(csv);
  std::string line;
  ASSERT_TRUE(std::getline(is, line));
  EXPECT_EQ(line.rfind("h,ln_inv_h,energy,energy_over_h2,membrane,bending", 0), 0u);
  int rows = 0;
  while (std::getline(is, line))
    if (!line.empty()) ++rows;
  EXPECT_EQ(rows, 2);
}

}  // namespace
