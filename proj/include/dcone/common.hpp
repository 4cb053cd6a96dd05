#pragma once

#include <cstdint>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dcone {

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// Error taxonomy mirrored by the CLI exit codes: config_error -> 2,
// numerical_error -> 3. Non-convergence is signaled through SolveResult,
// not an exception (the last iterate is always returned).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// FNV-1a, used to fingerprint configs and curve samples in artifacts.
// Stable across platforms and runs; not cryptographic.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 14695981039346656037ull) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<size_t>(i)] = digits[h & 0xf];
    h >>= 4;
  }
  return s;
}

// Brent's method on a sign-changing bracket. Tolerance is on the argument;
// the residual at the root is whatever the function grants.
template <class F>
double brent_root(F&& f, double a, double b, double xtol = 1e-14, int max_iter = 200) {
  double fa = f(a), fb = f(b);
  if (std::isnan(fa) || std::isnan(fb)) throw numerical_error("brent: NaN at bracket endpoint");
  if (fa * fb > 0.0) throw numerical_error("brent: endpoints do not bracket a root");
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  double c = a, fc = fa, d = b - a, e = d;
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
    const double m = 0.5 * (c - b);
    if (std::abs(m) <= tol || fb == 0.0) return b;
    if (std::abs(e) < tol || std::abs(fa) <= std::abs(fb)) {
      d = e = m;  // bisection
    } else {
      double p, q;
      const double s = fb / fa;
      if (a == c) {  // secant
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {  // inverse quadratic
        const double qa = fa / fc, rb = fb / fc;
        p = s * (2.0 * m * qa * (qa - rb) - (b - a) * (rb - 1.0));
        q = (qa - 1.0) * (rb - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q; else p = -p;
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
        e = d; d = p / q;  // accept interpolation
      } else {
        d = e = m;  // fall back to bisection
      }
    }
    a = b; fa = fb;
    b += (std::abs(d) > tol) ? d : (m > 0 ? tol : -tol);
    fb = f(b);
    if (std::isnan(fb)) throw numerical_error("brent: NaN during iteration");
    if ((fb > 0) == (fc > 0)) { c = a; fc = fa; d = e = b - a; }
  }
  throw numerical_error("brent: no convergence");
}

// Deterministic uniform double in [lo, hi). std::uniform_real_distribution is
// implementation-defined, so draws are built from raw 64-bit output instead.
template <class Rng>
double uniform_in(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0,1)
  return lo + (hi - lo) * u;
}

}  // namespace dcone
