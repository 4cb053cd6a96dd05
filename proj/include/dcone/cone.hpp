#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "dcone/common.hpp"
#include "dcone/curve.hpp"
#include "dcone/spectral.hpp"

namespace dcone {

// Pointwise data of the one-homogeneous extension y(r,θ) = r γ(θ).
struct ConeEvaluation {
  double r = 0.0;
  double theta = 0.0;
  Eigen::Vector3d value = Eigen::Vector3d::Zero();
  // Gradient in the orthonormal polar frame (e_r, e_θ/r): columns γ, γ'.
  Eigen::Matrix<double, 3, 2> gradient = Eigen::Matrix<double, 3, 2>::Zero();
  double hessian_norm_sq = 0.0;  // |γ(θ) + γ''(θ)|² / r²
};

namespace detail {
inline Eigen::Vector3d trig_interp_vec3(const Eigen::MatrixX3d& samples, double t) {
  Eigen::Vector3d out;
  std::vector<double> col(static_cast<size_t>(samples.rows()));
  for (int c = 0; c < 3; ++c) {
    for (Eigen::Index i = 0; i < samples.rows(); ++i) col[static_cast<size_t>(i)] = samples(i, c);
    out[c] = trig_interp_eval(col, t);
  }
  return out;
}
}  // namespace detail

inline ConeEvaluation evaluate_cone(const BoundaryCurve& c, double r, double theta) {
  if (!(r > 0.0)) throw config_error("evaluate_cone: r must be positive (the vertex is singular)");
  ConeEvaluation out;
  out.r = r;
  out.theta = theta;
  const Eigen::Vector3d g = detail::trig_interp_vec3(c.gamma, theta);
  const Eigen::Vector3d dg = detail::trig_interp_vec3(c.dgamma, theta);
  const Eigen::Vector3d d2g = detail::trig_interp_vec3(c.d2gamma, theta);
  out.value = r * g;
  out.gradient.col(0) = g;
  out.gradient.col(1) = dg;
  out.hessian_norm_sq = (g + d2g).squaredNorm() / (r * r);
  return out;
}

// ∫₀^{2π} |γ + γ''|² dθ by the trapezoid rule (spectrally exact for the
// band-limited sample set carried by BoundaryCurve).
inline double c1_angular(const BoundaryCurve& c) {
  const int n = static_cast<int>(c.theta.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += (c.gamma.row(i) + c.d2gamma.row(i)).squaredNorm();
  return acc * (2.0 * kPi / n);
}

// (1/ln(b/a)) ∫_{B_b \ B_a} |∇²(rγ)|² dx by Gauss–Legendre in r composed
// with the trapezoid rule in θ. The integrand is assembled from the full
// polar-frame Hessian of the map u = rγ — second radial derivative, mixed
// term with its exact cancellation left to floating point, and the angular
// term — rather than from the reduced |γ+γ''|²/r² formula, so the two
// routes in c1_constant are independent.
inline double c1_annulus_quadrature(const BoundaryCurve& c, double a, double b, int n_gauss = 32) {
  if (!(0.0 < a && a < b && b <= 1.0)) throw config_error("c1_annulus_quadrature: need 0 < a < b <= 1");
  std::vector<double> xg, wg;
  gauss_legendre(n_gauss, xg, wg);
  for (int q = 0; q < n_gauss; ++q) {
    xg[static_cast<size_t>(q)] = a + 0.5 * (b - a) * (xg[static_cast<size_t>(q)] + 1.0);
    wg[static_cast<size_t>(q)] *= 0.5 * (b - a);
  }
  const int n = static_cast<int>(c.theta.size());
  const double dth = 2.0 * kPi / n;
  double acc = 0.0;
  for (int q = 0; q < n_gauss; ++q) {
    const double r = xg[static_cast<size_t>(q)];
    double ring = 0.0;
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector3d g = c.gamma.row(i), dg = c.dgamma.row(i), d2g = c.d2gamma.row(i);
      const Eigen::Vector3d u_r = g, u_t = r * dg;
      const Eigen::Vector3d u_rr = Eigen::Vector3d::Zero(), u_rt = dg, u_tt = r * d2g;
      const Eigen::Vector3d h_rr = u_rr;
      const Eigen::Vector3d h_rt = u_rt / r - u_t / (r * r);
      const Eigen::Vector3d h_tt = u_tt / (r * r) + u_r / r;
      ring += h_rr.squaredNorm() + 2.0 * h_rt.squaredNorm() + h_tt.squaredNorm();
    }
    acc += wg[static_cast<size_t>(q)] * ring * dth * r;
  }
  return acc / std::log(b / a);
}

struct C1Result {
  double c1 = 0.0;             // the angular value — definition of record
  double c1_quadrature = 0.0;  // annulus B_1 \ B_{1/2}, 2-D quadrature route
  double relative_gap = 0.0;
};

// The logarithmic bending rate of the exact cone, computed both ways and
// cross-checked to relative 1e-8. Disagreement indicates a broken curve
// (non-band-limited samples, wrong derivative convention) and is an error,
// not a value to return.
inline C1Result c1_constant(const BoundaryCurve& c) {
  C1Result out;
  out.c1 = c1_angular(c);
  out.c1_quadrature = c1_annulus_quadrature(c, 0.5, 1.0);
  const double scale = std::max(std::abs(out.c1), std::abs(out.c1_quadrature));
  out.relative_gap = scale > 0.0 ? std::abs(out.c1 - out.c1_quadrature) / scale : 0.0;
  if (scale > 1e-14 && out.relative_gap > 1e-8)
    throw numerical_error("c1_constant: angular and quadrature routes disagree (relative gap " +
                          std::to_string(out.relative_gap) + ")");
  return out;
}

}  // namespace dcone
