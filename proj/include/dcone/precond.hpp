#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "dcone/common.hpp"
#include "dcone/mesh.hpp"
#include "dcone/spectral.hpp"

namespace dcone {

// Cholesky factorization of a symmetric positive-definite banded matrix,
// lower-band storage: band(d, j) = A(j+d, j) for d = 0..bw.
class BandedCholesky {
 public:
  void factor(Eigen::MatrixXd band) {
    l_ = std::move(band);
    const int bw = static_cast<int>(l_.rows()) - 1;
    const int n = static_cast<int>(l_.cols());
    for (int j = 0; j < n; ++j) {
      double d = l_(0, j);
      for (int k = std::max(0, j - bw); k < j; ++k) {
        const double ljk = l_(j - k, k);
        d -= ljk * ljk;
      }
      if (!(d > 0.0)) throw numerical_error("BandedCholesky: matrix is not positive definite");
      const double ljj = std::sqrt(d);
      l_(0, j) = ljj;
      for (int i = j + 1; i <= std::min(n - 1, j + bw); ++i) {
        double s = l_(i - j, j);
        for (int k = std::max(0, i - bw); k < j; ++k) s -= l_(i - k, k) * l_(j - k, k);
        l_(i - j, j) = s / ljj;
      }
    }
  }

  void solve_inplace(Eigen::Ref<Eigen::VectorXd> b) const {
    const int bw = static_cast<int>(l_.rows()) - 1;
    const int n = static_cast<int>(l_.cols());
    for (int i = 0; i < n; ++i) {
      double s = b[i];
      for (int k = std::max(0, i - bw); k < i; ++k) s -= l_(i - k, k) * b[k];
      b[i] = s / l_(0, i);
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = b[i];
      for (int k = i + 1; k <= std::min(n - 1, i + bw); ++k) s -= l_(k - i, i) * b[k];
      b[i] = s / l_(0, i);
    }
  }

 private:
  Eigen::MatrixXd l_;
};

// Fixed metric for the variable-metric solver: the Gauss-Newton Hessian of
// the energy at the exact cone. At a cone the linearized energy decouples
// over angular Fourier modes and components, so the metric is a family of
// small pentadiagonal radial systems indexed by frequency, applied through
// per-ring FFTs. For boundary data with |γ| = |γ'| = 1 the coefficients
// depend only on the mesh and h, not on the particular curve.
//
// Per free radial vector u at frequency k the quadratic form is
//   Σ_p w_p [ 4 q1² + (4k²/r²) u² + h²( 2 q2² + 4k² (q1/r - u/r²)²
//                                       + 2 (q1/r - k² u/r²)² ) ](p)
// with q1, q2 the mesh's first/second radial difference functionals.
class ConePreconditioner {
 public:
  ConePreconditioner(const PolarMesh& mesh, double h) : n_free_(mesh.rings() - 1), n_theta_(mesh.n_theta) {
    const int n = mesh.rings();
    const int n_freq = n_theta_ / 2 + 1;
    chol_.resize(static_cast<size_t>(n_freq));
    for (int kf = 0; kf < n_freq; ++kf) {
      Eigen::MatrixXd band = Eigen::MatrixXd::Zero(3, n_free_);
      const double k2 = static_cast<double>(kf) * kf;
      for (int p = 1; p <= n; ++p) {
        const double r = mesh.r[static_cast<size_t>(p)];
        const double w = mesh.ring_weight[p];
        // Functionals over free indices (ring index minus 1); constrained
        // rows contribute nothing to the quadratic form in u.
        int idx[4];
        double q1w[4], q2w[4], uw[4];
        int cnt = 0;
        for (int k = 0; k < static_cast<int>(mesh.stencil_idx.cols()); ++k) {
          const int ring = mesh.stencil_idx(p, k);
          if (ring <= 0 || ring >= n) continue;
          idx[cnt] = ring - 1;
          q1w[cnt] = mesh.stencil_w1(p, k);
          q2w[cnt] = mesh.stencil_w2(p, k);
          uw[cnt] = (ring == p) ? 1.0 : 0.0;
          ++cnt;
        }
        auto add = [&](double coeff, const double* va, const double* vb) {
          if (coeff == 0.0) return;
          for (int a = 0; a < cnt; ++a)
            for (int b = 0; b < cnt; ++b) {
              const int i = idx[a], j = idx[b];
              if (i < j) continue;
              if (i - j > 2) continue;
              band(i - j, j) += coeff * va[a] * vb[b];
            }
        };
        const double h2 = h * h;
        double m1[4], m2[4];
        for (int a = 0; a < cnt; ++a) {
          m1[a] = q1w[a] / r - uw[a] / (r * r);          // frame mixed term
          m2[a] = q1w[a] / r - k2 * uw[a] / (r * r);     // frame angular term
        }
        add(4.0 * w, q1w, q1w);
        add(4.0 * w * k2 / (r * r), uw, uw);
        add(2.0 * w * h2, q2w, q2w);
        add(4.0 * w * h2 * k2, m1, m1);
        add(2.0 * w * h2, m2, m2);
      }
      // Tiny ridge so frequencies whose form is only semidefinite on the
      // trimmed index set still factor.
      const double ridge = 1e-12 * band.row(0).maxCoeff();
      for (int j = 0; j < n_free_; ++j) band(0, j) += ridge;
      chol_[static_cast<size_t>(kf)].factor(std::move(band));
    }
  }

  // v is packed free-node data (component-major, ring-major, contiguous
  // rings); returns H₀⁻¹ v.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    const int n_freq = n_theta_ / 2 + 1;
    Eigen::VectorXd out(v.size());
    const long comp_stride = static_cast<long>(n_free_) * n_theta_;
    std::vector<std::vector<std::complex<double>>> spec(static_cast<size_t>(n_free_));
    std::vector<double> row(static_cast<size_t>(n_theta_));
    Eigen::VectorXd re(n_free_), im(n_free_);
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < n_free_; ++i) {
        const long base = c * comp_stride + static_cast<long>(i) * n_theta_;
        for (int j = 0; j < n_theta_; ++j) row[static_cast<size_t>(j)] = v[base + j];
        spec[static_cast<size_t>(i)] = rfft(row);
      }
      for (int kf = 0; kf < n_freq; ++kf) {
        for (int i = 0; i < n_free_; ++i) {
          re[i] = spec[static_cast<size_t>(i)][static_cast<size_t>(kf)].real();
          im[i] = spec[static_cast<size_t>(i)][static_cast<size_t>(kf)].imag();
        }
        chol_[static_cast<size_t>(kf)].solve_inplace(re);
        chol_[static_cast<size_t>(kf)].solve_inplace(im);
        for (int i = 0; i < n_free_; ++i)
          spec[static_cast<size_t>(i)][static_cast<size_t>(kf)] = {re[i], im[i]};
      }
      for (int i = 0; i < n_free_; ++i) {
        const std::vector<double> back = irfft(spec[static_cast<size_t>(i)], n_theta_);
        const long base = c * comp_stride + static_cast<long>(i) * n_theta_;
        for (int j = 0; j < n_theta_; ++j) out[base + j] = back[static_cast<size_t>(j)];
      }
    }
    return out;
  }

 private:
  int n_free_;
  int n_theta_;
  std::vector<BandedCholesky> chol_;
};

}  // namespace dcone
