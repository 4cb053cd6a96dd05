#include "dcone/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "dcone/common.hpp"

namespace {

using dcone::kPi;

std::vector<double> sample(int n, double (*f)(double)) {
  std::vector<double> v(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = f(2.0 * kPi * i / n);
  return v;
}

TEST(Spectral, FirstDerivativeExactOnTrigPolynomials) {
  const int n = 32;
  const Eigen::MatrixXd d1 = dcone::periodic_diff_matrix(n);
  Eigen::VectorXd u(n), du_true(n);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * i / n;
    u(i) = std::sin(3.0 * t) + 0.5 * std::cos(7.0 * t);
    du_true(i) = 3.0 * std::cos(3.0 * t) - 3.5 * std::sin(7.0 * t);
  }
  EXPECT_LT((d1 * u - du_true).cwiseAbs().maxCoeff(), 1e-11);
  // Constants are annihilated.
  EXPECT_LT((d1 * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Spectral, SecondDerivativeExactOnTrigPolynomials) {
  const int n = 32;
  const Eigen::MatrixXd d2 = dcone::periodic_diff2_matrix(n);
  Eigen::VectorXd u(n), d2u_true(n);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * i / n;
    u(i) = std::sin(3.0 * t) + 0.5 * std::cos(7.0 * t);
    d2u_true(i) = -9.0 * std::sin(3.0 * t) - 24.5 * std::cos(7.0 * t);
  }
  EXPECT_LT((d2 * u - d2u_true).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((d2 * Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Spectral, FftRoundTrip) {
  const int n = 24;
  const auto v = sample(n, [](double t) { return std::exp(std::sin(t)) - 2.0 * std::cos(2.0 * t); });
  const auto spec = dcone::rfft(v);
  ASSERT_EQ(static_cast<int>(spec.size()), n / 2 + 1);
  const auto back = dcone::irfft(spec, n);
  for (int i = 0; i < n; ++i) EXPECT_NEAR(back[static_cast<size_t>(i)], v[static_cast<size_t>(i)], 1e-13);
}

TEST(Spectral, AntiderivativeInvertsDerivative) {
  const int n = 40;
  const auto f = sample(n, [](double t) { return std::cos(t) + 0.25 * std::sin(5.0 * t); });
  // Mean-zero input: antiderivative followed by spectral differentiation
  // reproduces the samples.
  const auto F = dcone::periodic_antiderivative(f);
  const Eigen::MatrixXd d1 = dcone::periodic_diff_matrix(n);
  Eigen::VectorXd Fv(n);
  for (int i = 0; i < n; ++i) Fv(i) = F[static_cast<size_t>(i)];
  const Eigen::VectorXd df = d1 * Fv;
  for (int i = 0; i < n; ++i) EXPECT_NEAR(df(i), f[static_cast<size_t>(i)], 1e-11);
}

TEST(Spectral, TrigInterpolationMatchesSamplesAndMidpoints) {
  const int n = 16;
  const auto v = sample(n, [](double t) { return std::sin(2.0 * t) + 0.3 * std::cos(5.0 * t); });
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * i / n;
    EXPECT_NEAR(dcone::trig_interp_eval(v, t), v[static_cast<size_t>(i)], 1e-12);
  }
  // Band-limited input is reproduced exactly off the grid too.
  const double t = 0.7391;
  EXPECT_NEAR(dcone::trig_interp_eval(v, t), std::sin(2.0 * t) + 0.3 * std::cos(5.0 * t), 1e-12);
}

TEST(Spectral, GaussLegendreIntegratesPolynomialsExactly) {
  std::vector<double> x, w;
  dcone::gauss_legendre(8, x, w);
  ASSERT_EQ(x.size(), 8u);
  // Degree 15 is integrated exactly by 8 points.
  double acc = 0.0, acc2 = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    acc += w[i] * std::pow(x[i], 14);
    acc2 += w[i] * std::pow(x[i], 15);
  }
  EXPECT_NEAR(acc, 2.0 / 15.0, 1e-14);
  EXPECT_NEAR(acc2, 0.0, 1e-14);
}

}  // namespace
