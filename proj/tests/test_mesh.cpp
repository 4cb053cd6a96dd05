#include "dcone/mesh.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "dcone/common.hpp"

namespace {

using dcone::kPi;

dcone::MeshSpec spec(int n_r, int n_theta, dcone::Grading g = dcone::Grading::geometric) {
  dcone::MeshSpec s;
  s.n_r = n_r;
  s.n_theta = n_theta;
  s.grading = g;
  return s;
}

TEST(Mesh, GeometricLayout) {
  const auto m = dcone::build_mesh(spec(96, 128), 1.0 / 64.0);
  EXPECT_EQ(m->r[0], 0.0);
  EXPECT_EQ(m->r.back(), 1.0);
  EXPECT_NEAR(m->r[1], 1.0 / 256.0, 1e-15);  // innermost ring at h/4
  EXPECT_GE(m->rings_per_octave, 8);
  // Strictly increasing radii.
  EXPECT_TRUE(std::is_sorted(m->r.begin(), m->r.end()));
  for (size_t i = 1; i < m->r.size(); ++i) EXPECT_GT(m->r[i], m->r[i - 1]);
}

TEST(Mesh, DyadicRadiiLandOnRings) {
  const double h = 1.0 / 64.0;
  const auto m = dcone::build_mesh(spec(96, 128), h);
  auto has_ring = [&](double target) {
    for (double r : m->r)
      if (std::abs(r - target) < 1e-13) return true;
    return false;
  };
  EXPECT_TRUE(has_ring(h));
  EXPECT_TRUE(has_ring(h / 2.0));
  EXPECT_TRUE(has_ring(0.5));
  EXPECT_TRUE(has_ring(0.25));
}

TEST(Mesh, RingWeightsArePositiveAndIntegrateRdr) {
  for (double h : {1.0 / 16.0, 1.0 / 64.0, 0.011}) {
    const auto m = dcone::build_mesh(spec(96, 128), h);
    EXPECT_GT(m->ring_weight.minCoeff(), -1e-16);
    for (int i = 1; i <= m->rings(); ++i) EXPECT_GT(m->ring_weight(i), 0.0);
    // sum w_i = integral_0^1 r dr = 1/2, so constants integrate to pi.
    EXPECT_NEAR(m->ring_weight.sum(), 0.5, 1e-12);
  }
}

TEST(Mesh, NodeQuadratureIntegratesSmoothFunctions) {
  const auto m = dcone::build_mesh(spec(96, 192), 1.0 / 64.0);
  // f = 1 -> pi exactly; f = r -> 2*pi/3 with piecewise-linear-in-r accuracy.
  double acc1 = 0.0, accr = 0.0;
  for (int i = 1; i <= m->rings(); ++i) {
    acc1 += m->ring_weight(i) * m->n_theta;
    accr += m->ring_weight(i) * m->n_theta * m->r[static_cast<size_t>(i)];
  }
  EXPECT_NEAR(acc1 * m->dtheta, kPi, 1e-10);
  EXPECT_NEAR(accr * m->dtheta, 2.0 * kPi / 3.0, 1e-4);
}

TEST(Mesh, RegionWeightsAdditive) {
  const auto m = dcone::build_mesh(spec(96, 128), 1.0 / 64.0);
  // Split at an arbitrary interior radius: the two halves must sum to the
  // full weights down to roundoff, including across extrapolation cells.
  for (double a : {0.3, 0.5, 0.07, 0.011}) {
    const Eigen::VectorXd inner = m->region_weights(0.0, a);
    const Eigen::VectorXd outer = m->region_weights(a, 1.0);
    EXPECT_LT((inner + outer - m->ring_weight).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Mesh, AnnulusClassification) {
  EXPECT_EQ(dcone::PolarMesh::annulus_of(1.0), 0);
  EXPECT_EQ(dcone::PolarMesh::annulus_of(0.75), 0);
  EXPECT_EQ(dcone::PolarMesh::annulus_of(0.5), 1);
  EXPECT_EQ(dcone::PolarMesh::annulus_of(0.26), 1);
  EXPECT_EQ(dcone::PolarMesh::annulus_of(0.25), 2);
}

TEST(Mesh, DyadicCutoffFormula) {
  // ceil(log2(1/h) - log2(ln(1/h))), at least 1.
  EXPECT_EQ(dcone::dyadic_cutoff(1.0 / 64.0), 4);
  EXPECT_EQ(dcone::dyadic_cutoff(1.0 / 512.0), 7);
  EXPECT_EQ(dcone::dyadic_cutoff(0.2), 2);
  EXPECT_GE(dcone::dyadic_cutoff(0.249), 1);
}

TEST(Mesh, RejectsUnderResolvedRadialBudget) {
  // 64 intervals cannot give 8 rings per octave across 9 octaves.
  EXPECT_THROW(dcone::build_mesh(spec(64, 128), 1.0 / 64.0), dcone::config_error);
  EXPECT_THROW(dcone::build_mesh(spec(16, 64), 1.0 / 16.0), dcone::config_error);
}

TEST(Mesh, RejectsBadSpecAndThickness) {
  EXPECT_THROW(dcone::build_mesh(spec(8, 128), 0.1), dcone::config_error);    // n_r too small
  EXPECT_THROW(dcone::build_mesh(spec(96, 63), 0.1), dcone::config_error);    // odd n_theta
  EXPECT_THROW(dcone::build_mesh(spec(96, 128), 0.3), dcone::config_error);   // h >= 1/4
  EXPECT_THROW(dcone::build_mesh(spec(96, 128), 0.0), dcone::config_error);   // h <= 0
}

TEST(Mesh, UniformGradingBasics) {
  const auto m = dcone::build_mesh(spec(40, 64, dcone::Grading::uniform), 0.1);
  EXPECT_EQ(m->rings(), 40);
  EXPECT_NEAR(m->r[1], 1.0 / 40.0, 1e-15);
  EXPECT_NEAR(m->ring_weight.sum(), 0.5, 1e-12);
}

TEST(Mesh, StencilsDifferentiatePolynomialsExactly) {
  const auto m = dcone::build_mesh(spec(96, 64), 1.0 / 32.0);
  // Second-order stencils are exact on quadratics in r; the one-sided
  // boundary row interpolates four rings and is exact on cubics.
  auto apply = [&](int i, auto f) {
    double d1 = 0.0, d2 = 0.0;
    for (int k = 0; k < static_cast<int>(m->stencil_idx.cols()); ++k) {
      const double fv = f(m->r[static_cast<size_t>(m->stencil_idx(i, k))]);
      d1 += m->stencil_w1(i, k) * fv;
      d2 += m->stencil_w2(i, k) * fv;
    }
    return std::pair<double, double>(d1, d2);
  };
  auto check = [&](double a, double b, double c) {
    for (int i = 1; i <= m->rings(); ++i) {
      const auto [d1, d2] = apply(i, [&](double rv) { return a * rv * rv + b * rv + c; });
      const double r = m->r[static_cast<size_t>(i)];
      EXPECT_NEAR(d1, 2.0 * a * r + b, 1e-9 * (1.0 + std::abs(2.0 * a * r + b)));
      EXPECT_NEAR(d2, 2.0 * a, 2e-7 * (1.0 + std::abs(a)));
    }
  };
  check(1.0, 0.0, 0.0);
  check(0.5, -2.0, 3.0);
  const auto [b1, b2] = apply(m->rings(), [](double rv) { return rv * rv * rv; });
  EXPECT_NEAR(b1, 3.0, 3e-7);
  EXPECT_NEAR(b2, 6.0, 2e-4);
}

}  // namespace
