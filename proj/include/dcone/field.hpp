#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "dcone/common.hpp"
#include "dcone/curve.hpp"
#include "dcone/mesh.hpp"

namespace dcone {

// Quintic ramp used for the core of the matching profile: 0 on [0,1/2],
// identity on [1,∞), C² across both knots.
inline double phi_blend(double t) {
  if (t <= 0.5) return 0.0;
  if (t >= 1.0) return t;
  const double s = 2.0 * t - 1.0;
  return ((4.5 * s - 11.5) * s + 8.0) * s * s * s;
}

// Nodal values on a PolarMesh, NC components. Component c is an
// (N+1) x n_theta matrix whose row i holds ring i; row 0 is the center node
// broadcast across all columns (kept constant so angular operators
// annihilate it), row N is the boundary ring.
template <int NC>
struct FieldT {
  std::shared_ptr<const PolarMesh> mesh;
  std::array<Eigen::MatrixXd, NC> comp;

  FieldT() = default;
  explicit FieldT(std::shared_ptr<const PolarMesh> m) : mesh(std::move(m)) {
    for (auto& c : comp) c = Eigen::MatrixXd::Zero(mesh->rings() + 1, mesh->n_theta);
  }

  int rows() const { return mesh->rings() + 1; }
  int cols() const { return mesh->n_theta; }

  void set_center(const Eigen::Matrix<double, NC, 1>& v) {
    for (int c = 0; c < NC; ++c) comp[static_cast<size_t>(c)].row(0).setConstant(v[c]);
  }

  // Max-abs over all components and nodes (center counted once is enough
  // for the uses here; the broadcast row is constant anyway).
  double max_abs() const {
    double m = 0.0;
    for (const auto& c : comp) m = std::max(m, c.cwiseAbs().maxCoeff());
    return m;
  }
};

using Field = FieldT<3>;
using ScalarField = FieldT<1>;

inline void require_curve_matches_mesh(const BoundaryCurve& curve, const PolarMesh& mesh) {
  if (static_cast<int>(curve.theta.size()) != mesh.n_theta)
    throw config_error("curve sample count does not match mesh n_theta");
}

inline bool boundary_matches_curve(const Field& y, const BoundaryCurve& curve) {
  const int n = y.rows() - 1;
  for (int c = 0; c < 3; ++c)
    for (int j = 0; j < y.cols(); ++j)
      if (y.comp[static_cast<size_t>(c)](n, j) != curve.gamma(j, c)) return false;
  return true;
}

// y(r,θ) = r γ(θ): the one-homogeneous extension of the boundary data.
inline Field make_cone_field(std::shared_ptr<const PolarMesh> mesh, const BoundaryCurve& curve) {
  require_curve_matches_mesh(curve, *mesh);
  Field y(std::move(mesh));
  const int n = y.rows() - 1;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i <= n; ++i)
      y.comp[static_cast<size_t>(c)].row(i) = y.mesh->r[static_cast<size_t>(i)] * curve.gamma.col(c).transpose();
  return y;
}

// y(r,θ) = h φ(r/h) γ(θ): agrees with the cone for r >= h, flattens the
// vertex across (h/2, h), and is constant zero on B_{h/2}.
inline Field make_profile_field(std::shared_ptr<const PolarMesh> mesh, const BoundaryCurve& curve, double h) {
  require_curve_matches_mesh(curve, *mesh);
  Field y(std::move(mesh));
  const int n = y.rows() - 1;
  for (int i = 0; i <= n; ++i) {
    const double r = y.mesh->r[static_cast<size_t>(i)];
    const double s = r >= h ? r : h * phi_blend(r / h);
    for (int c = 0; c < 3; ++c) y.comp[static_cast<size_t>(c)].row(i) = s * curve.gamma.col(c).transpose();
  }
  return y;
}

namespace detail {

// Natural cubic spline through (x_i, y_i); x strictly increasing.
class CubicSpline {
 public:
  CubicSpline(const std::vector<double>& x, Eigen::VectorXd y) : x_(x), y_(std::move(y)) {
    const int n = static_cast<int>(x_.size());
    m_ = Eigen::VectorXd::Zero(n);
    if (n < 3) return;
    Eigen::VectorXd a(n), b(n), c(n), d(n);
    a.setZero(); c.setZero();
    b[0] = b[n - 1] = 1.0;
    d[0] = d[n - 1] = 0.0;
    for (int i = 1; i < n - 1; ++i) {
      const double hl = x_[static_cast<size_t>(i)] - x_[static_cast<size_t>(i - 1)];
      const double hr = x_[static_cast<size_t>(i + 1)] - x_[static_cast<size_t>(i)];
      a[i] = hl / 6.0;
      b[i] = (hl + hr) / 3.0;
      c[i] = hr / 6.0;
      d[i] = (y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl;
    }
    // Thomas sweep.
    for (int i = 1; i < n; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    m_[n - 1] = d[n - 1] / b[n - 1];
    for (int i = n - 2; i >= 0; --i) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
  }

  double eval(double xq) const {
    const int n = static_cast<int>(x_.size());
    int lo = 0, hi = n - 1;
    if (xq <= x_.front()) hi = 1;
    else if (xq >= x_.back()) lo = n - 2;
    else {
      while (hi - lo > 1) {
        const int mid = (lo + hi) / 2;
        (x_[static_cast<size_t>(mid)] <= xq ? lo : hi) = mid;
      }
    }
    const double hl = x_[static_cast<size_t>(hi)] - x_[static_cast<size_t>(lo)];
    const double t = (xq - x_[static_cast<size_t>(lo)]) / hl;
    const double u = 1.0 - t;
    return u * y_[lo] + t * y_[hi] +
           hl * hl / 6.0 * (u * (u * u - 1.0) * m_[lo] + t * (t * t - 1.0) * m_[hi]);
  }

 private:
  std::vector<double> x_;
  Eigen::VectorXd y_, m_;
};

}  // namespace detail

// Transfer a field to another mesh with the same angular sampling: cubic
// radial interpolation per angle over the source rings; below the source's
// innermost ring the one-homogeneous scaling y(r) = (r/r_src,1) y(r_src,1)
// is used (the natural continuation for maps that are asymptotically
// conical near the vertex). Boundary values are copied verbatim and the
// center is reset to the source center.
template <int NC>
FieldT<NC> resample_field(const FieldT<NC>& src, std::shared_ptr<const PolarMesh> mesh) {
  if (src.mesh->n_theta != mesh->n_theta)
    throw config_error("resample_field: angular sampling differs");
  FieldT<NC> out(std::move(mesh));
  const int ns = src.rows() - 1, nt = out.rows() - 1;
  const double r1 = src.mesh->r[1];
  std::vector<double> xs(src.mesh->r.begin() + 1, src.mesh->r.end());
  for (int c = 0; c < NC; ++c) {
    const auto& S = src.comp[static_cast<size_t>(c)];
    auto& T = out.comp[static_cast<size_t>(c)];
    for (int j = 0; j < out.cols(); ++j) {
      detail::CubicSpline sp(xs, S.col(j).segment(1, ns));
      for (int i = 1; i < nt; ++i) {
        const double r = out.mesh->r[static_cast<size_t>(i)];
        T(i, j) = r < r1 ? S(1, j) * (r / r1) : sp.eval(r);
      }
      T(nt, j) = S(ns, j);
      T(0, j) = S(0, j);
    }
  }
  return out;
}

// --- free-node packing ------------------------------------------------------
//
// The solver's unknowns are the interior rings 1..N-1 of all three
// components (center and boundary are Dirichlet data). Layout: component-
// major, then ring-major, then angle, so each ring is a contiguous run —
// convenient for per-ring transforms.

inline long free_dof_count(const PolarMesh& m) {
  return 3l * (m.rings() - 1) * m.n_theta;
}

inline Eigen::VectorXd pack_free_nodes(const Field& y) {
  const int n = y.rows() - 1, nt = y.cols();
  Eigen::VectorXd x(free_dof_count(*y.mesh));
  long p = 0;
  for (int c = 0; c < 3; ++c)
    for (int i = 1; i < n; ++i)
      for (int j = 0; j < nt; ++j) x[p++] = y.comp[static_cast<size_t>(c)](i, j);
  return x;
}

inline void unpack_free_nodes(const Eigen::VectorXd& x, Field& y) {
  const int n = y.rows() - 1, nt = y.cols();
  long p = 0;
  for (int c = 0; c < 3; ++c)
    for (int i = 1; i < n; ++i)
      for (int j = 0; j < nt; ++j) y.comp[static_cast<size_t>(c)](i, j) = x[p++];
}

// --- snapshots ------------------------------------------------------------

inline nlohmann::json field_to_json(const Field& y, const std::string& curve_hash) {
  nlohmann::json j;
  j["schema"] = "field-v1";
  j["h"] = y.mesh->h;
  j["grading"] = to_string(y.mesh->grading);
  j["n_r"] = y.mesh->spec.n_r;
  j["n_theta"] = y.mesh->n_theta;
  j["curve_hash"] = curve_hash;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> flat;
    flat.reserve(static_cast<size_t>(y.rows()) * static_cast<size_t>(y.cols()));
    const auto& M = y.comp[static_cast<size_t>(c)];
    for (int i = 0; i < y.rows(); ++i)
      for (int k = 0; k < y.cols(); ++k) flat.push_back(M(i, k));
    j["values"].push_back(flat);
  }
  return j;
}

inline Field field_from_json(const nlohmann::json& j) {
  if (j.value("schema", "") != "field-v1") throw config_error("field snapshot: unknown schema");
  MeshSpec spec;
  spec.n_r = j.at("n_r").get<int>();
  spec.n_theta = j.at("n_theta").get<int>();
  spec.grading = grading_from_string(j.at("grading").get<std::string>());
  Field y(build_mesh(spec, j.at("h").get<double>()));
  const auto& vals = j.at("values");
  if (vals.size() != 3) throw config_error("field snapshot: expected 3 components");
  for (int c = 0; c < 3; ++c) {
    const auto flat = vals[static_cast<size_t>(c)].get<std::vector<double>>();
    if (static_cast<int>(flat.size()) != y.rows() * y.cols())
      throw config_error("field snapshot: value count does not match mesh");
    auto& M = y.comp[static_cast<size_t>(c)];
    size_t p = 0;
    for (int i = 0; i < y.rows(); ++i)
      for (int k = 0; k < y.cols(); ++k) M(i, k) = flat[p++];
  }
  return y;
}

}  // namespace dcone
