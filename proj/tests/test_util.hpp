// Shared fixtures for the test suites: reference curves, small meshes, and
// deterministic random fields.
#pragma once

#include <memory>
#include <random>

#include "dcone/curve.hpp"
#include "dcone/energy.hpp"
#include "dcone/field.hpp"
#include "dcone/mesh.hpp"

namespace dtest {

inline dcone::BoundaryCurve wave_curve(int n_theta = 256, double amplitude = 0.2, int wavenumber = 3) {
  dcone::CurveSpec spec;
  spec.family = dcone::CurveFamily::latitude_wave;
  spec.amplitude = amplitude;
  spec.wavenumber = wavenumber;
  spec.n_theta = n_theta;
  return dcone::make_curve(spec);
}

inline std::shared_ptr<const dcone::PolarMesh> small_mesh(double h = 0.125, int n_r = 48,
                                                          int n_theta = 64) {
  dcone::MeshSpec spec;
  spec.n_r = n_r;
  spec.n_theta = n_theta;
  return dcone::build_mesh(spec, h);
}

// Smooth deterministic perturbation that vanishes on the boundary ring and at
// the center, so perturbed fields stay admissible.
inline void perturb_field(dcone::Field& y, std::uint64_t seed, double scale) {
  std::mt19937_64 rng(seed);
  const auto& m = *y.mesh;
  const int n = m.rings();
  for (auto& comp : y.comp)
    for (int i = 1; i < n; ++i) {
      const double envelope = m.r[static_cast<size_t>(i)] * (1.0 - m.r[static_cast<size_t>(i)]);
      for (int j = 0; j < m.n_theta; ++j)
        comp(i, j) += scale * envelope * dcone::uniform_in(rng, -1.0, 1.0);
    }
}

// Central-difference directional derivative of the energy at y along dy.
inline double directional_fd(const dcone::EnergyModel& model, const dcone::Field& y,
                             const Eigen::VectorXd& direction, double h, double t) {
  dcone::Field yp = y, ym = y;
  Eigen::VectorXd x = dcone::pack_free_nodes(y);
  dcone::unpack_free_nodes(x + t * direction, yp);
  dcone::unpack_free_nodes(x - t * direction, ym);
  return (model.evaluate(yp, h).total - model.evaluate(ym, h).total) / (2.0 * t);
}

}  // namespace dtest
