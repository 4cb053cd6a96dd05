#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "dcone/common.hpp"

namespace dcone {

enum class Grading { geometric, uniform };

inline std::string to_string(Grading g) { return g == Grading::geometric ? "geometric" : "uniform"; }
inline Grading grading_from_string(const std::string& s) {
  if (s == "geometric") return Grading::geometric;
  if (s == "uniform") return Grading::uniform;
  throw config_error("unknown grading: " + s);
}

struct MeshSpec {
  int n_r = 96;       // radial interval budget (realized count may be lower, see build_mesh)
  int n_theta = 192;  // angular intervals
  double r_min = 0.0; // informational; geometric builds derive it from h
  Grading grading = Grading::geometric;

  void validate() const {
    if (n_r < 16) throw config_error("mesh: n_r must be >= 16");
    if (n_theta < 64 || n_theta % 2 != 0) throw config_error("mesh: n_theta must be even and >= 64");
    if (r_min < 0.0 || r_min >= 1.0) throw config_error("mesh: r_min out of range");
  }
};

// Polar tensor mesh: rings 1..N at radii r[1] < ... < r[N] = 1 with n_theta
// columns each, plus the single shared center node (r[0] = 0). Geometric
// grading subdivides each dyadic octave [r_min*2^j, r_min*2^{j+1}] into a
// fixed number m of equal-ratio intervals, so every dyadic multiple of
// r_min = h/4 (in particular h/2 and h) lands exactly on a ring.
struct PolarMesh {
  double h = 0.0;  // core scale the mesh was built for
  Grading grading = Grading::geometric;
  MeshSpec spec;   // as requested (n_r is a budget)
  int rings_per_octave = 0;  // m; 0 for uniform grading

  std::vector<double> r;      // size N+1, r[0] = 0, r[N] = 1
  std::vector<double> theta;  // size n_theta
  int n_theta = 0;
  double dtheta = 0.0;

  // Net radial quadrature weight per ring (integral of r dr against the
  // nodal interpolation basis; see build). ring_weight[0] is 0: the center
  // cell's mass is carried by ring 1 through the density convention
  // den(0) := den(r_1).
  Eigen::VectorXd ring_weight;

  // Cells [r[i], r[i+1]] whose density is extrapolated from the two rings
  // above (first cell of each dyadic octave). Keeps profile-style fields,
  // whose radial derivatives jump at octave knots, from polluting the
  // quadrature of the region above the knot.
  std::vector<int> octave_first_cells;

  // Radial derivative stencils at rings 1..N over node rows 0..N: 3-point
  // centered in the interior (second-order first and second derivatives on
  // the graded spacing; fourth column unused), 4-point one-sided at the
  // boundary ring so the second derivative stays second order there too.
  Eigen::MatrixXi stencil_idx;
  Eigen::MatrixXd stencil_w1, stencil_w2;

  int rings() const { return static_cast<int>(r.size()) - 1; }          // N
  long node_count() const { return 1l + static_cast<long>(rings()) * n_theta; }

  // Dyadic annulus index of a radius: j with 2^{-j-1} < r <= 2^{-j}.
  static int annulus_of(double radius) {
    if (radius <= 0.0 || radius > 1.0) throw config_error("annulus_of: radius out of (0,1]");
    const double x = -std::log2(radius);
    // exact powers close the annulus above them (half-open below)
    if (std::abs(x - std::round(x)) < 1e-12) return static_cast<int>(std::llround(x));
    return static_cast<int>(std::floor(x));
  }

  std::vector<int> annulus_rings(int j) const {
    if (std::pow(2.0, -j) < 2.0 * r[1] - 1e-15) throw config_error("annulus_rings: annulus below mesh resolution");
    std::vector<int> out;
    const double hi = std::pow(2.0, -j), lo = 0.5 * hi;
    for (int i = 1; i <= rings(); ++i)
      if (r[static_cast<size_t>(i)] > lo + 1e-15 && r[static_cast<size_t>(i)] <= hi + 1e-15) out.push_back(i);
    return out;
  }

  // Net radial weights for integrating over the radial interval (a, b],
  // clipping each cell's exact linear-density integral. Summing region
  // weights over a partition of (0,1] reproduces ring_weight exactly up to
  // floating point associativity.
  Eigen::VectorXd region_weights(double a, double b) const {
    const int n = rings();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n + 1);
    for (int i = 0; i < n; ++i) {
      const double ra = r[static_cast<size_t>(i)], rb = r[static_cast<size_t>(i + 1)];
      const double lo = std::max(ra, a), hi = std::min(rb, b);
      if (hi <= lo) continue;
      const double i0 = 0.5 * (hi * hi - lo * lo);          // ∫ r dr
      const double i1 = (hi * hi * hi - lo * lo * lo) / 3.0; // ∫ r^2 dr
      if (i == 0) {
        w[1] += i0;  // constant density den(r_1) across the center cell
      } else if (is_octave_first(i)) {
        const double r1 = r[static_cast<size_t>(i + 1)], r2 = r[static_cast<size_t>(i + 2)];
        const double e = r1 * i0 - i1;  // ∫ (r1 - r) r dr over the clip
        w[i + 1] += i0 + e / (r2 - r1);
        w[i + 2] += -e / (r2 - r1);
      } else {
        const double dr = rb - ra;
        w[i] += (rb * i0 - i1) / dr;
        w[i + 1] += (i1 - ra * i0) / dr;
      }
    }
    return w;
  }

  bool is_octave_first(int cell) const {
    return std::binary_search(octave_first_cells.begin(), octave_first_cells.end(), cell);
  }
};

inline std::shared_ptr<const PolarMesh> build_mesh(const MeshSpec& spec, double h) {
  spec.validate();
  if (!(h > 0.0 && h < 0.25)) throw config_error("build_mesh: h must lie in (0, 1/4)");

  auto mesh = std::make_shared<PolarMesh>();
  PolarMesh& m = *mesh;
  m.h = h;
  m.grading = spec.grading;
  m.spec = spec;
  m.n_theta = spec.n_theta;
  m.dtheta = 2.0 * kPi / spec.n_theta;
  m.theta.resize(static_cast<size_t>(spec.n_theta));
  for (int j = 0; j < spec.n_theta; ++j) m.theta[static_cast<size_t>(j)] = m.dtheta * j;

  if (spec.grading == Grading::geometric) {
    const double rmin = h / 4.0;
    const double octaves_f = std::log2(1.0 / rmin);
    const int octaves = static_cast<int>(std::ceil(octaves_f - 1e-12));
    const int mm = (spec.n_r - 1) / octaves;
    if (mm < 8) throw config_error("build_mesh: n_r too small for geometric grading at this h (need >= 8 rings per octave)");
    m.rings_per_octave = mm;
    m.r.push_back(0.0);
    const double ratio = std::pow(2.0, 1.0 / mm);
    double cur = rmin;
    int k = 0;
    while (cur < 1.0 - 1e-12) {
      m.r.push_back(cur);
      if (k % mm == 0) m.octave_first_cells.push_back(static_cast<int>(m.r.size()) - 1);
      ++k;
      cur = rmin * std::pow(ratio, k);
    }
    m.r.push_back(1.0);
    // A short partial top octave may lack the two rings above its first
    // cell that the extrapolating quadrature needs; such a cell has no
    // density kink to protect against, so let it fall back to hat weights.
    while (!m.octave_first_cells.empty() && m.octave_first_cells.back() + 2 >= static_cast<int>(m.r.size()))
      m.octave_first_cells.pop_back();
  } else {
    m.rings_per_octave = 0;
    m.r.resize(static_cast<size_t>(spec.n_r) + 1);
    for (int i = 0; i <= spec.n_r; ++i) m.r[static_cast<size_t>(i)] = static_cast<double>(i) / spec.n_r;
  }

  const int n = m.rings();

  // Net ring weights: hat-function (mass-lumped P1) integrals of r dr per
  // cell, with the center-cell and octave-first-cell density conventions.
  m.ring_weight = m.region_weights(0.0, 1.0);
  for (int i = 1; i <= n; ++i)
    if (!(m.ring_weight[i] > 0.0)) throw numerical_error("build_mesh: nonpositive net quadrature weight");
  const double total = m.ring_weight.sum();
  if (std::abs(total - 0.5) > 1e-12) throw numerical_error("build_mesh: ring weights do not integrate r dr to 1/2");

  // Radial stencils.
  m.stencil_idx = Eigen::MatrixXi::Zero(n + 1, 4);
  m.stencil_w1 = Eigen::MatrixXd::Zero(n + 1, 4);
  m.stencil_w2 = Eigen::MatrixXd::Zero(n + 1, 4);
  for (int i = 1; i < n; ++i) {
    const int ka = i - 1, kb = i, kc = i + 1;
    const double xa = m.r[static_cast<size_t>(ka)], xb = m.r[static_cast<size_t>(kb)], xc = m.r[static_cast<size_t>(kc)];
    const double x0 = m.r[static_cast<size_t>(i)];
    m.stencil_idx(i, 0) = ka; m.stencil_idx(i, 1) = kb; m.stencil_idx(i, 2) = kc;
    // column 3 stays {index 0, weight 0}: center row is constrained, so the
    // padding entry is inert in applications, adjoints, and quadratic forms
    m.stencil_w1(i, 0) = (2 * x0 - xb - xc) / ((xa - xb) * (xa - xc));
    m.stencil_w1(i, 1) = (2 * x0 - xa - xc) / ((xb - xa) * (xb - xc));
    m.stencil_w1(i, 2) = (2 * x0 - xa - xb) / ((xc - xa) * (xc - xb));
    m.stencil_w2(i, 0) = 2.0 / ((xa - xb) * (xa - xc));
    m.stencil_w2(i, 1) = 2.0 / ((xb - xa) * (xb - xc));
    m.stencil_w2(i, 2) = 2.0 / ((xc - xa) * (xc - xb));
  }
  {
    // One-sided cubic stencil at the boundary ring: derivative weights of the
    // Lagrange basis on the last four rings, evaluated at r = 1.
    const int kk[4] = {n - 3, n - 2, n - 1, n};
    const double x0 = m.r[static_cast<size_t>(n)];
    double x[4];
    for (int k = 0; k < 4; ++k) x[k] = m.r[static_cast<size_t>(kk[k])];
    for (int j = 0; j < 4; ++j) {
      m.stencil_idx(n, j) = kk[j];
      double denom = 1.0, s1 = 0.0, s2 = 0.0;
      for (int a = 0; a < 4; ++a) {
        if (a == j) continue;
        denom *= x[j] - x[a];
        s2 += x0 - x[a];
        for (int b = a + 1; b < 4; ++b)
          if (b != j) s1 += (x0 - x[a]) * (x0 - x[b]);
      }
      m.stencil_w1(n, j) = s1 / denom;
      m.stencil_w2(n, j) = 2.0 * s2 / denom;
    }
  }

  if (spec.grading == Grading::geometric) {
    // Post-conditions the rest of the code relies on.
    auto is_ring = [&](double target) {
      for (double rr : m.r)
        if (std::abs(rr - target) < 1e-12 * std::max(1.0, target)) return true;
      return false;
    };
    if (!is_ring(h) || !is_ring(0.5 * h)) throw numerical_error("build_mesh: core radii missed the ring set");
    int inside = 0;
    for (int i = 1; i <= n; ++i)
      if (m.r[static_cast<size_t>(i)] <= 0.5 * h + 1e-15) ++inside;
    if (inside < 2) throw numerical_error("build_mesh: fewer than two rings inside the half-core");
  }
  return mesh;
}

// Exact ∫_{2^{-j-1} < |x| <= 2^{-j}} portion bookkeeping uses the same
// clipped cell integrals as region_weights; the dyadic partition used for
// breakdowns is (2^{-M},1] split into annuli plus the ball B_{2^{-M}}.
inline int dyadic_cutoff(double h) {
  const double l = std::log2(1.0 / h) - std::log2(std::log(1.0 / h));
  int m = static_cast<int>(std::ceil(l - 1e-12));
  return std::max(m, 1);
}

}  // namespace dcone
