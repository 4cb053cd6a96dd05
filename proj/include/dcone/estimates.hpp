#pragma once

#include <cmath>
#include <functional>
#include <memory>

#include <Eigen/Dense>

#include "dcone/common.hpp"
#include "dcone/energy.hpp"
#include "dcone/field.hpp"
#include "dcone/mesh.hpp"

namespace dcone {

// Radial region of the unit disk: the disk (0,b], an annulus (a,b], or the
// boundary circle r = 1.
struct Region {
  enum class Kind { disk, annulus, boundary };
  Kind kind = Kind::disk;
  double a = 0.0, b = 1.0;

  static Region disk(double radius = 1.0) { return {Kind::disk, 0.0, radius}; }
  static Region annulus(double a, double b) {
    if (!(0.0 <= a && a < b && b <= 1.0)) throw config_error("region: need 0 <= a < b <= 1");
    return {Kind::annulus, a, b};
  }
  static Region boundary() { return {Kind::boundary, 1.0, 1.0}; }
};

struct Norms {
  double l2 = 0.0;
  double grad_l2 = 0.0;
  double hess_l2 = 0.0;
  double trace_l2 = 0.0;  // always the boundary circle ∂B₁
};

// Quadrature-consistent norms: same frame derivatives and ring weights as
// the energy, clipped to the region; the trace uses the trapezoid rule on
// the boundary ring.
template <int NC>
Norms norms(const FieldT<NC>& f, const Region& reg) {
  const PolarMesh& m = *f.mesh;
  Norms out;
  {
    double tr = 0.0;
    const int nrow = m.rings();
    for (int c = 0; c < NC; ++c) tr += f.comp[static_cast<size_t>(c)].row(nrow).squaredNorm();
    out.trace_l2 = std::sqrt(tr * m.dtheta);
  }
  if (reg.kind == Region::Kind::boundary) return out;
  if (reg.b < 2.0 * m.r[1]) throw config_error("norms: region below mesh resolution");

  EnergyModel model(f.mesh);
  const FrameData<NC> fr = model.frame(f);
  const int rows = m.rings() + 1, cols = m.n_theta;
  Eigen::VectorXd val_r = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd grad_r = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd hess_r = Eigen::VectorXd::Zero(rows);
  for (int i = 1; i < rows; ++i) {
    const double ri = 1.0 / m.r[static_cast<size_t>(i)];
    double v = 0.0, g = 0.0, hs = 0.0;
    for (int c = 0; c < NC; ++c) {
      const auto sc = static_cast<size_t>(c);
      for (int j = 0; j < cols; ++j) {
        const double u = f.comp[sc](i, j);
        const double ur = fr.ur[sc](i, j), ut = fr.ut[sc](i, j) * ri;
        const double hrr = fr.urr[sc](i, j);
        const double hrt = fr.urt[sc](i, j) * ri - fr.ut[sc](i, j) * ri * ri;
        const double htt = fr.utt[sc](i, j) * ri * ri + fr.ur[sc](i, j) * ri;
        v += u * u;
        g += ur * ur + ut * ut;
        hs += hrr * hrr + 2.0 * hrt * hrt + htt * htt;
      }
    }
    val_r[i] = v * m.dtheta;
    grad_r[i] = g * m.dtheta;
    hess_r[i] = hs * m.dtheta;
  }
  const double a = reg.kind == Region::Kind::disk ? 0.0 : reg.a;
  const Eigen::VectorXd w = m.region_weights(a, reg.b);
  out.l2 = std::sqrt(std::max(0.0, w.dot(val_r)));
  out.grad_l2 = std::sqrt(std::max(0.0, w.dot(grad_r)));
  out.hess_l2 = std::sqrt(std::max(0.0, w.dot(hess_r)));
  return out;
}

struct InterpolationRatios {
  double trace_ratio = 0.0;  // trace² / (l2 · w12)
  double grad_ratio = 0.0;   // grad² / (l2² + l2·hess)
};

template <int NC>
InterpolationRatios interpolation_ratio(const FieldT<NC>& f, const Region& reg = Region::disk()) {
  const Norms n = norms(f, reg);
  if (n.l2 <= 0.0) throw config_error("interpolation_ratio: field is identically zero on the region");
  InterpolationRatios out;
  const double w12 = std::sqrt(n.l2 * n.l2 + n.grad_l2 * n.grad_l2);
  out.trace_ratio = n.trace_l2 * n.trace_l2 / (n.l2 * w12);
  out.grad_ratio = n.grad_l2 * n.grad_l2 / (n.l2 * n.l2 + n.l2 * n.hess_l2);
  return out;
}

// ṽ(r,θ) = value_scale · v(s·r, θ) on the same mesh, by cubic radial
// interpolation through the source nodes (center included). With
// s = r₀, value_scale = 1/r₀ this is the blow-up ê(x) = r₀⁻¹ e(r₀ x);
// with value_scale = 1 it is the plain dilation used in the scaling checks.
// Resampling error budget: 1e-4 relative in the norms of production-mesh
// fields; at dyadic s on a geometric mesh the target radii are themselves
// rings and the resampling is node-exact.
template <int NC>
FieldT<NC> rescale_field(const FieldT<NC>& f, double s, double value_scale = 1.0) {
  if (!(s > 0.0 && s <= 1.0)) throw config_error("rescale_field: need 0 < s <= 1");
  FieldT<NC> out(f.mesh);
  const PolarMesh& m = *f.mesh;
  const int n = m.rings();
  std::vector<double> xs(m.r.begin(), m.r.end());
  for (int c = 0; c < NC; ++c) {
    const auto& S = f.comp[static_cast<size_t>(c)];
    auto& T = out.comp[static_cast<size_t>(c)];
    for (int j = 0; j < m.n_theta; ++j) {
      detail::CubicSpline sp(xs, S.col(j));
      for (int i = 0; i <= n; ++i) T(i, j) = value_scale * sp.eval(s * m.r[static_cast<size_t>(i)]);
    }
  }
  return out;
}

inline ScalarField scalar_from_function(std::shared_ptr<const PolarMesh> mesh,
                                        const std::function<double(double, double)>& f) {
  ScalarField out(std::move(mesh));
  const PolarMesh& m = *out.mesh;
  out.comp[0].row(0).setConstant(f(0.0, 0.0));
  for (int i = 1; i <= m.rings(); ++i)
    for (int j = 0; j < m.n_theta; ++j) {
      const double r = m.r[static_cast<size_t>(i)], t = m.theta[static_cast<size_t>(j)];
      out.comp[0](i, j) = f(r * std::cos(t), r * std::sin(t));
    }
  return out;
}

// Quadrature-consistent mean of a scalar field over the disk B_eps.
inline double region_mean(const ScalarField& f, double radius) {
  const PolarMesh& m = *f.mesh;
  if (radius < 2.0 * m.r[1]) throw config_error("region_mean: radius below mesh resolution");
  const Eigen::VectorXd w = m.region_weights(0.0, radius);
  const Eigen::VectorXd row_sum = f.comp[0].rowwise().sum() * m.dtheta;
  const double area = w.sum() * 2.0 * kPi;
  return w.dot(row_sum) / area;
}

// Mean of the polar-frame gradient of a scalar field over B_radius,
// rotated to Cartesian components.
inline Eigen::Vector2d region_mean_gradient(const ScalarField& f, double radius) {
  const PolarMesh& m = *f.mesh;
  if (radius < 2.0 * m.r[1]) throw config_error("region_mean_gradient: radius below mesh resolution");
  EnergyModel model(f.mesh);
  const FrameData<1> fr = model.frame(f);
  const Eigen::VectorXd w = m.region_weights(0.0, radius);
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for (int i = 1; i <= m.rings(); ++i) {
    if (w[i] == 0.0) continue;
    const double ri = 1.0 / m.r[static_cast<size_t>(i)];
    Eigen::Vector2d row = Eigen::Vector2d::Zero();
    for (int j = 0; j < m.n_theta; ++j) {
      const double ct = std::cos(m.theta[static_cast<size_t>(j)]);
      const double st = std::sin(m.theta[static_cast<size_t>(j)]);
      const double ur = fr.ur[0](i, j), ut = fr.ut[0](i, j) * ri;
      row[0] += ur * ct - ut * st;
      row[1] += ur * st + ut * ct;
    }
    acc += w[i] * row * m.dtheta;
  }
  const double area = w.sum() * 2.0 * kPi;
  return acc / area;
}

}  // namespace dcone
