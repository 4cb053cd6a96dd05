#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <nlohmann/json.hpp>

#include "dcone/common.hpp"
#include "dcone/spectral.hpp"

namespace dcone {

enum class CurveFamily { equator, latitude_wave };

inline std::string to_string(CurveFamily f) {
  return f == CurveFamily::equator ? "equator" : "latitude-wave";
}

inline CurveFamily curve_family_from_string(const std::string& s) {
  if (s == "equator") return CurveFamily::equator;
  if (s == "latitude-wave") return CurveFamily::latitude_wave;
  throw config_error("unknown curve family: " + s);
}

struct CurveSpec {
  CurveFamily family = CurveFamily::equator;
  double amplitude = 0.0;   // colatitude oscillation amplitude (dimensionless)
  int wavenumber = 3;       // angular wavenumber k >= 2
  int n_theta = 256;        // angular samples, even, >= 64

  void validate() const {
    if (n_theta < 64 || n_theta % 2 != 0) throw config_error("curve: n_theta must be even and >= 64");
    if (amplitude < 0.0) throw config_error("curve: amplitude must be >= 0");
    if (family == CurveFamily::latitude_wave && wavenumber < 2) throw config_error("curve: wavenumber must be >= 2");
  }
};

// Closed unit-speed spherical curve sampled on the equispaced angular grid,
// together with its first three derivatives in the curve parameter.
struct BoundaryCurve {
  std::vector<double> theta;
  Eigen::MatrixX3d gamma;     // n x 3, unit rows
  Eigen::MatrixX3d dgamma;    // unit rows (arclength parametrization)
  Eigen::MatrixX3d d2gamma;
  Eigen::MatrixX3d d3gamma;
  double planarity_defect = 0.0;  // smallest singular value of the 3 x n sample matrix

  // Construction metadata (not part of the serialized schema).
  std::string family;
  double amplitude = 0.0;
  int wavenumber = 0;
  double mean_colatitude = kPi / 2.0;  // realized by closure shooting
  double closure_residual = 0.0;       // |phi(2pi) - phi(0) - 2pi|

  int n() const { return static_cast<int>(theta.size()); }
};

namespace detail {

inline double smallest_singular_value(const Eigen::MatrixX3d& g) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(g.transpose());
  return svd.singularValues()(2);
}

inline void spectral_derivatives(BoundaryCurve& c) {
  const int n = c.n();
  const Eigen::MatrixXd d1 = periodic_diff_matrix(n);
  c.dgamma = d1 * c.gamma;
  c.d2gamma = d1 * c.dgamma;
  c.d3gamma = d1 * c.d2gamma;
}

}  // namespace detail

inline BoundaryCurve make_equator(int n_theta) {
  if (n_theta < 64 || n_theta % 2 != 0) throw config_error("make_equator: n_theta must be even and >= 64");
  BoundaryCurve c;
  c.theta.resize(static_cast<size_t>(n_theta));
  c.gamma.resize(n_theta, 3);
  for (int i = 0; i < n_theta; ++i) {
    const double t = 2.0 * kPi * i / n_theta;
    c.theta[static_cast<size_t>(i)] = t;
    c.gamma(i, 0) = std::cos(t);
    c.gamma(i, 1) = std::sin(t);
    c.gamma(i, 2) = 0.0;
  }
  detail::spectral_derivatives(c);
  c.planarity_defect = detail::smallest_singular_value(c.gamma);
  c.family = "equator";
  return c;
}

// Latitude wave: colatitude psi(theta) = psi0 + eps*cos(k theta) on the unit
// sphere, longitude recovered from the unit-speed condition
// phi' = sqrt(1 - psi'^2) / sin(psi). The curve closes (phi gains exactly
// 2pi per period) only for one mean colatitude psi0, found by shooting:
// at psi0 = pi/2 the parallel is too long (mean phi' < 1 for any eps > 0),
// and pushing the band toward the pole shortens it, so a sign change is
// guaranteed on (eps + margin, pi/2]. The user-facing amplitude is realized
// exactly; only the latitude of the band is adjusted.
inline BoundaryCurve make_latitude_wave(const CurveSpec& spec) {
  spec.validate();
  if (spec.amplitude == 0.0) return make_equator(spec.n_theta);

  const int n = spec.n_theta;
  const int k = spec.wavenumber;
  const double eps = spec.amplitude;
  if (eps * k >= 1.0) throw config_error("make_latitude_wave: amplitude*wavenumber must be < 1 for a real unit-speed quadrature");

  std::vector<double> theta(static_cast<size_t>(n)), cs(static_cast<size_t>(n)), sn(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * i / n;
    theta[static_cast<size_t>(i)] = t;
    cs[static_cast<size_t>(i)] = std::cos(k * t);
    sn[static_cast<size_t>(i)] = std::sin(k * t);
  }

  // mean(phi') - 1 on the sample grid; the equispaced average is spectrally
  // exact for smooth periodic integrands, so closure holds to roundoff at
  // the root.
  auto closure_gap = [&](double psi0) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double psi = psi0 + eps * cs[static_cast<size_t>(i)];
      const double dpsi = -eps * k * sn[static_cast<size_t>(i)];
      const double rad = 1.0 - dpsi * dpsi;
      acc += std::sqrt(rad) / std::sin(psi);
    }
    return acc / n - 1.0;
  };

  const double lo = eps + 1e-3;
  const double hi = kPi / 2.0;
  if (lo >= hi) throw config_error("make_latitude_wave: amplitude too large");
  if (closure_gap(lo) <= 0.0) throw numerical_error("make_latitude_wave: closure gap does not bracket a root");
  const double psi0 = brent_root(closure_gap, lo, hi, 1e-15);

  std::vector<double> dphi(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double psi = psi0 + eps * cs[static_cast<size_t>(i)];
    const double dpsi = -eps * k * sn[static_cast<size_t>(i)];
    dphi[static_cast<size_t>(i)] = std::sqrt(1.0 - dpsi * dpsi) / std::sin(psi);
  }
  const std::vector<double> phi = periodic_antiderivative(dphi, 0.0);

  BoundaryCurve c;
  c.theta = theta;
  c.gamma.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    const double psi = psi0 + eps * cs[static_cast<size_t>(i)];
    const double ph = phi[static_cast<size_t>(i)];
    c.gamma(i, 0) = std::sin(psi) * std::cos(ph);
    c.gamma(i, 1) = std::sin(psi) * std::sin(ph);
    c.gamma(i, 2) = std::cos(psi);
  }
  detail::spectral_derivatives(c);
  c.planarity_defect = detail::smallest_singular_value(c.gamma);
  c.family = "latitude-wave";
  c.amplitude = eps;
  c.wavenumber = k;
  c.mean_colatitude = psi0;

  double mean_dphi = 0.0;
  for (double v : dphi) mean_dphi += v;
  mean_dphi /= n;
  c.closure_residual = 2.0 * kPi * std::abs(mean_dphi - 1.0);
  return c;
}

inline BoundaryCurve make_curve(const CurveSpec& spec) {
  spec.validate();
  return spec.family == CurveFamily::equator ? make_equator(spec.n_theta) : make_latitude_wave(spec);
}

struct CurveValidation {
  double unit_length_max = 0.0;   // max | |gamma| - 1 |
  double unit_speed_max = 0.0;    // max | |dgamma| - 1 |
  double orthogonality_max = 0.0; // max | gamma . dgamma |
  double periodicity_max = 0.0;   // trig interpolant mismatch theta=0 vs 2pi
  double planarity_defect = 0.0;
  bool planar = false;            // defect below threshold 1e-6
};

inline CurveValidation validate_curve(const BoundaryCurve& c) {
  CurveValidation v;
  const int n = c.n();
  for (int i = 0; i < n; ++i) {
    v.unit_length_max = std::max(v.unit_length_max, std::abs(c.gamma.row(i).norm() - 1.0));
    v.unit_speed_max = std::max(v.unit_speed_max, std::abs(c.dgamma.row(i).norm() - 1.0));
    v.orthogonality_max = std::max(v.orthogonality_max, std::abs(c.gamma.row(i).dot(c.dgamma.row(i))));
  }
  for (int comp = 0; comp < 3; ++comp) {
    std::vector<double> col(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) col[static_cast<size_t>(i)] = c.gamma(i, comp);
    const double at0 = trig_interp_eval(col, 0.0);
    const double at2pi = trig_interp_eval(col, 2.0 * kPi);
    v.periodicity_max = std::max(v.periodicity_max, std::abs(at2pi - at0));
  }
  v.planarity_defect = c.planarity_defect;
  v.planar = c.planarity_defect < 1e-6;
  return v;
}

// Serialized schema is exactly {theta, gamma, dgamma, d2gamma}; the third
// derivative is recomputed spectrally on load.
inline nlohmann::json curve_to_json(const BoundaryCurve& c) {
  nlohmann::json j;
  j["theta"] = c.theta;
  auto rows = [](const Eigen::MatrixX3d& m) {
    std::vector<std::array<double, 3>> out(static_cast<size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<size_t>(i)] = {m(i, 0), m(i, 1), m(i, 2)};
    return out;
  };
  j["gamma"] = rows(c.gamma);
  j["dgamma"] = rows(c.dgamma);
  j["d2gamma"] = rows(c.d2gamma);
  return j;
}

inline BoundaryCurve curve_from_json(const nlohmann::json& j) {
  BoundaryCurve c;
  c.theta = j.at("theta").get<std::vector<double>>();
  const int n = static_cast<int>(c.theta.size());
  if (n < 64 || n % 2 != 0) throw config_error("curve json: invalid sample count");
  auto fill = [n](Eigen::MatrixX3d& m, const nlohmann::json& arr, const char* key) {
    if (static_cast<int>(arr.size()) != n) throw config_error(std::string("curve json: bad length for ") + key);
    m.resize(n, 3);
    for (int i = 0; i < n; ++i)
      for (int comp = 0; comp < 3; ++comp) m(i, comp) = arr[static_cast<size_t>(i)][static_cast<size_t>(comp)].get<double>();
  };
  fill(c.gamma, j.at("gamma"), "gamma");
  fill(c.dgamma, j.at("dgamma"), "dgamma");
  fill(c.d2gamma, j.at("d2gamma"), "d2gamma");
  const Eigen::MatrixXd d1 = periodic_diff_matrix(n);
  c.d3gamma = d1 * c.d2gamma;
  c.planarity_defect = detail::smallest_singular_value(c.gamma);
  c.family = "loaded";
  return c;
}

inline std::string curve_hash(const BoundaryCurve& c) {
  return hash_hex(fnv1a(curve_to_json(c).dump()));
}

}  // namespace dcone
