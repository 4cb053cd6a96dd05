#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "dcone/common.hpp"
#include "dcone/field.hpp"
#include "dcone/mesh.hpp"
#include "dcone/spectral.hpp"

namespace dcone {

struct AnnulusEnergy {
  double membrane = 0.0;
  double bending = 0.0;
};

// E(y) = membrane + h² bending, with the dyadic split used throughout the
// scaling study: annuli A_j = {2^{-j-1} < |x| <= 2^{-j}} for j < cutoff and
// the core ball B_{2^{-cutoff}}. The parts sum to the totals exactly up to
// floating-point associativity because every cell's quadrature mass is
// clipped, never duplicated.
struct EnergyBreakdown {
  double h = 0.0;
  double membrane = 0.0;
  double bending = 0.0;
  double total = 0.0;
  int cutoff = 0;
  std::vector<AnnulusEnergy> per_annulus;
  AnnulusEnergy core;
};

namespace detail {

inline Eigen::MatrixXd radial_apply(const PolarMesh& m, const Eigen::MatrixXd& u,
                                    const Eigen::MatrixXd& w) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(u.rows(), u.cols());
  const int nk = static_cast<int>(w.cols());
  for (int i = 1; i < u.rows(); ++i)
    for (int k = 0; k < nk; ++k) out.row(i) += w(i, k) * u.row(m.stencil_idx(i, k));
  return out;
}

inline void radial_adjoint_add(const PolarMesh& m, const Eigen::MatrixXd& g,
                               const Eigen::MatrixXd& w, Eigen::MatrixXd& acc) {
  const int nk = static_cast<int>(w.cols());
  for (int i = 1; i < g.rows(); ++i)
    for (int k = 0; k < nk; ++k) acc.row(m.stencil_idx(i, k)) += w(i, k) * g.row(i);
}

}  // namespace detail

// First and second derivatives of each component in the orthonormal polar
// frame ingredients: radial via the mesh stencils, angular via spectral
// differentiation (exact for band-limited data, O(n^-2)-free). Row 0 is
// unused: densities are integrated with ring weights that carry the center
// cell's mass on ring 1.
template <int NC>
struct FrameData {
  std::array<Eigen::MatrixXd, NC> ur, ut, urr, urt, utt;
};

class EnergyModel {
 public:
  explicit EnergyModel(std::shared_ptr<const PolarMesh> mesh)
      : mesh_(std::move(mesh)),
        d1_(periodic_diff_matrix(mesh_->n_theta)),
        d2_(periodic_diff2_matrix(mesh_->n_theta)) {}

  const PolarMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const PolarMesh> mesh_ptr() const { return mesh_; }
  const Eigen::MatrixXd& d1() const { return d1_; }

  template <int NC>
  FrameData<NC> frame(const FieldT<NC>& y) const {
    FrameData<NC> f;
    for (int c = 0; c < NC; ++c) {
      const Eigen::MatrixXd& u = y.comp[static_cast<size_t>(c)];
      auto& s = f;
      s.ut[static_cast<size_t>(c)] = u * d1_.transpose();
      s.utt[static_cast<size_t>(c)] = u * d2_.transpose();
      s.ur[static_cast<size_t>(c)] = detail::radial_apply(*mesh_, u, mesh_->stencil_w1);
      s.urr[static_cast<size_t>(c)] = detail::radial_apply(*mesh_, u, mesh_->stencil_w2);
      s.urt[static_cast<size_t>(c)] = detail::radial_apply(*mesh_, s.ut[static_cast<size_t>(c)], mesh_->stencil_w1);
    }
    return f;
  }

  // Pointwise densities at rings 1..N (row 0 zero): membrane
  // |∇yᵀ∇y - Id|² and bending |∇²y|², both in the orthonormal frame.
  void densities(const Field& y, Eigen::MatrixXd& mem, Eigen::MatrixXd& bend) const {
    const FrameData<3> f = frame(y);
    densities_from_frame(f, mem, bend);
  }

  EnergyBreakdown evaluate(const Field& y, double h) const {
    Eigen::MatrixXd mem, bend;
    densities(y, mem, bend);
    return breakdown_from_densities(mem, bend, h);
  }

  // Total energy and its exact discrete gradient (adjoint of the density
  // assembly against the quadrature weights). Rows 0 and N of the output
  // are the raw scatter onto the constrained nodes; callers that hold them
  // fixed simply ignore those rows.
  double energy_and_gradient(const Field& y, double h, Field& grad) const {
    const PolarMesh& m = *mesh_;
    const int rows = y.rows(), cols = y.cols();
    const FrameData<3> f = frame(y);

    Eigen::VectorXd rinv = Eigen::VectorXd::Zero(rows);
    for (int i = 1; i < rows; ++i) rinv[i] = 1.0 / m.r[static_cast<size_t>(i)];
    const double dth = m.dtheta;

    // Node weights w_i = ring_weight_i * dθ; energy accumulators.
    double e_mem = 0.0, e_bend = 0.0;

    std::array<Eigen::MatrixXd, 3> g_ur, g_ut, g_urr, g_urt, g_utt;
    for (int c = 0; c < 3; ++c) {
      g_ur[static_cast<size_t>(c)] = Eigen::MatrixXd::Zero(rows, cols);
      g_ut[static_cast<size_t>(c)] = Eigen::MatrixXd::Zero(rows, cols);
      g_urr[static_cast<size_t>(c)] = Eigen::MatrixXd::Zero(rows, cols);
      g_urt[static_cast<size_t>(c)] = Eigen::MatrixXd::Zero(rows, cols);
      g_utt[static_cast<size_t>(c)] = Eigen::MatrixXd::Zero(rows, cols);
    }

    for (int i = 1; i < rows; ++i) {
      const double ri = rinv[i];
      const double wi = m.ring_weight[i] * dth;
      for (int j = 0; j < cols; ++j) {
        Eigen::Vector3d a, b, hrr, hrt, htt;
        for (int c = 0; c < 3; ++c) {
          const auto sc = static_cast<size_t>(c);
          a[c] = f.ur[sc](i, j);
          b[c] = f.ut[sc](i, j) * ri;
          hrr[c] = f.urr[sc](i, j);
          hrt[c] = f.urt[sc](i, j) * ri - f.ut[sc](i, j) * ri * ri;
          htt[c] = f.utt[sc](i, j) * ri * ri + f.ur[sc](i, j) * ri;
        }
        const double g11 = a.squaredNorm() - 1.0;
        const double g12 = a.dot(b);
        const double g22 = b.squaredNorm() - 1.0;
        e_mem += wi * (g11 * g11 + 2.0 * g12 * g12 + g22 * g22);
        e_bend += wi * (hrr.squaredNorm() + 2.0 * hrt.squaredNorm() + htt.squaredNorm());

        const Eigen::Vector3d da = wi * (4.0 * g11 * a + 4.0 * g12 * b);
        const Eigen::Vector3d db = wi * (4.0 * g22 * b + 4.0 * g12 * a);
        const double h2w = h * h * wi;
        const Eigen::Vector3d dhrr = h2w * 2.0 * hrr;
        const Eigen::Vector3d dhrt = h2w * 4.0 * hrt;
        const Eigen::Vector3d dhtt = h2w * 2.0 * htt;
        for (int c = 0; c < 3; ++c) {
          const auto sc = static_cast<size_t>(c);
          g_ur[sc](i, j) += da[c] + dhtt[c] * ri;
          g_ut[sc](i, j) += db[c] * ri - dhrt[c] * ri * ri;
          g_urr[sc](i, j) += dhrr[c];
          g_urt[sc](i, j) += dhrt[c] * ri;
          g_utt[sc](i, j) += dhtt[c] * ri * ri;
        }
      }
    }

    for (int c = 0; c < 3; ++c) {
      const auto sc = static_cast<size_t>(c);
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(rows, cols);
      detail::radial_adjoint_add(*mesh_, g_ur[sc], m.stencil_w1, acc);
      detail::radial_adjoint_add(*mesh_, g_urr[sc], m.stencil_w2, acc);
      // urt = R1(ut): adjoint through the radial stencil, then through D1.
      Eigen::MatrixXd g_ut_total = g_ut[sc];
      detail::radial_adjoint_add(*mesh_, g_urt[sc], m.stencil_w1, g_ut_total);
      acc += g_ut_total * d1_;
      acc += g_utt[sc] * d2_;
      grad.comp[sc] = acc;
    }
    return e_mem + h * h * e_bend;
  }

  void densities_from_frame(const FrameData<3>& f, Eigen::MatrixXd& mem, Eigen::MatrixXd& bend) const {
    const PolarMesh& m = *mesh_;
    const int rows = mesh_->rings() + 1, cols = mesh_->n_theta;
    mem = Eigen::MatrixXd::Zero(rows, cols);
    bend = Eigen::MatrixXd::Zero(rows, cols);
    for (int i = 1; i < rows; ++i) {
      const double ri = 1.0 / m.r[static_cast<size_t>(i)];
      for (int j = 0; j < cols; ++j) {
        Eigen::Vector3d a, b, hrr, hrt, htt;
        for (int c = 0; c < 3; ++c) {
          const auto sc = static_cast<size_t>(c);
          a[c] = f.ur[sc](i, j);
          b[c] = f.ut[sc](i, j) * ri;
          hrr[c] = f.urr[sc](i, j);
          hrt[c] = f.urt[sc](i, j) * ri - f.ut[sc](i, j) * ri * ri;
          htt[c] = f.utt[sc](i, j) * ri * ri + f.ur[sc](i, j) * ri;
        }
        const double g11 = a.squaredNorm() - 1.0;
        const double g12 = a.dot(b);
        const double g22 = b.squaredNorm() - 1.0;
        mem(i, j) = g11 * g11 + 2.0 * g12 * g12 + g22 * g22;
        bend(i, j) = hrr.squaredNorm() + 2.0 * hrt.squaredNorm() + htt.squaredNorm();
      }
    }
  }

  EnergyBreakdown breakdown_from_densities(const Eigen::MatrixXd& mem, const Eigen::MatrixXd& bend,
                                           double h) const {
    const PolarMesh& m = *mesh_;
    EnergyBreakdown out;
    out.h = h;
    out.cutoff = dyadic_cutoff(h);
    const Eigen::VectorXd mem_r = mem.rowwise().sum() * m.dtheta;
    const Eigen::VectorXd bend_r = bend.rowwise().sum() * m.dtheta;
    out.membrane = m.ring_weight.dot(mem_r);
    out.bending = m.ring_weight.dot(bend_r);
    out.total = out.membrane + h * h * out.bending;
    out.per_annulus.resize(static_cast<size_t>(out.cutoff));
    for (int j = 0; j < out.cutoff; ++j) {
      const Eigen::VectorXd w = m.region_weights(std::pow(2.0, -j - 1), std::pow(2.0, -j));
      out.per_annulus[static_cast<size_t>(j)] = {w.dot(mem_r), w.dot(bend_r)};
    }
    const Eigen::VectorXd wc = m.region_weights(0.0, std::pow(2.0, -out.cutoff));
    out.core = {wc.dot(mem_r), wc.dot(bend_r)};
    return out;
  }

 private:
  std::shared_ptr<const PolarMesh> mesh_;
  Eigen::MatrixXd d1_, d2_;
};

}  // namespace dcone
