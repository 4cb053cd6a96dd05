#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "dcone/common.hpp"

namespace dcone {

// Dense differentiation matrices for 2pi-periodic data on n equispaced
// samples (n even). Entries are the classic cotangent / cosecant formulas;
// both matrices annihilate constants exactly, which is what lets the shared
// center node ride along as a constant angular row elsewhere in the code.
inline Eigen::MatrixXd periodic_diff_matrix(int n) {
  if (n < 2 || n % 2 != 0) throw config_error("periodic_diff_matrix: n must be even and >= 2");
  Eigen::MatrixXd d(n, n);
  const double hh = 2.0 * kPi / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        d(i, j) = 0.0;
      } else {
        const int k = i - j;
        const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
        d(i, j) = 0.5 * sgn / std::tan(0.5 * hh * k);
      }
    }
  }
  return d;
}

inline Eigen::MatrixXd periodic_diff2_matrix(int n) {
  if (n < 2 || n % 2 != 0) throw config_error("periodic_diff2_matrix: n must be even and >= 2");
  Eigen::MatrixXd d(n, n);
  const double hh = 2.0 * kPi / n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        d(i, j) = -kPi * kPi / (3.0 * hh * hh) - 1.0 / 6.0;
      } else {
        const int k = i - j;
        const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
        const double s = std::sin(0.5 * hh * k);
        d(i, j) = -sgn / (2.0 * s * s);
      }
    }
  }
  return d;
}

// Half-spectrum forward/inverse real FFT. Output length n/2+1.
inline std::vector<std::complex<double>> rfft(const std::vector<double>& x) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> out;
  fft.fwd(out, x);
  return out;
}

inline std::vector<double> irfft(const std::vector<std::complex<double>>& f, int n) {
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<double> out;
  fft.inv(out, f, n);
  return out;
}

// Periodic antiderivative: given samples of g on the 2pi-periodic grid,
// returns samples of G with G' = g and G(theta_0) = g0. The mean of g shows
// up as a linear (non-periodic) ramp, handled separately from the
// zero-mean spectral part.
inline std::vector<double> periodic_antiderivative(const std::vector<double>& g, double g0 = 0.0) {
  const int n = static_cast<int>(g.size());
  auto f = rfft(g);
  const double mean = f[0].real() / n;
  f[0] = 0.0;
  for (int k = 1; k < static_cast<int>(f.size()); ++k) {
    f[k] /= std::complex<double>(0.0, static_cast<double>(k));
  }
  // Nyquist bin of the antiderivative is dropped (its sine interpolant
  // vanishes on the grid anyway).
  if (n % 2 == 0) f[static_cast<size_t>(n / 2)] = 0.0;
  auto per = irfft(f, n);
  std::vector<double> out(g.size());
  const double dt = 2.0 * kPi / n;
  for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = g0 + mean * (dt * i) + (per[static_cast<size_t>(i)] - per[0]);
  return out;
}

// Evaluate the trigonometric interpolant of periodic samples at angle t.
inline double trig_interp_eval(const std::vector<double>& x, double t) {
  const int n = static_cast<int>(x.size());
  const auto f = rfft(x);
  double acc = f[0].real() / n;
  for (int k = 1; k < static_cast<int>(f.size()); ++k) {
    const double w = (2 * k == n) ? 1.0 : 2.0;  // Nyquist counted once
    acc += w * (f[static_cast<size_t>(k)].real() * std::cos(k * t) - f[static_cast<size_t>(k)].imag() * std::sin(k * t)) / n;
  }
  return acc;
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on the
// Chebyshev initial guess; machine precision for modest n.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(static_cast<size_t>(n), 0.0);
  w.assign(static_cast<size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[static_cast<size_t>(i)] = -z;
    x[static_cast<size_t>(n - 1 - i)] = z;
    w[static_cast<size_t>(i)] = 2.0 / ((1.0 - z * z) * pp * pp);
    w[static_cast<size_t>(n - 1 - i)] = w[static_cast<size_t>(i)];
  }
}

}  // namespace dcone
